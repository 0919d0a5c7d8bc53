#include "precsel/matio/fetch.hpp"

#include <curl/curl.h>
#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>
#include <zlib.h>

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "precsel/error.hpp"
#include "precsel/matio/manifest.hpp"
#include "precsel/matio/matrix_market.hpp"

namespace precsel {
namespace fs = std::filesystem;
namespace {

std::size_t curl_sink(char* data, std::size_t size, std::size_t nmemb, void* user) {
    static_cast<std::string*>(user)->append(data, size * nmemb);
    return size * nmemb;
}

class FileLock {
public:
    explicit FileLock(const fs::path& path) : fd_(::open(path.c_str(), O_CREAT | O_RDWR, 0644)) {
        if (fd_ < 0 || ::flock(fd_, LOCK_EX) != 0) throw IoError("cannot lock " + path.string());
    }
    ~FileLock() {
        if (fd_ >= 0) {
            ::flock(fd_, LOCK_UN);
            ::close(fd_);
        }
    }
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;

private:
    int fd_;
};

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    out << s;
    if (!out) throw IoError("cannot write " + p.string());
}

std::string trim(std::string s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    return s;
}

void record_in_manifest(const fs::path& cache_dir, const std::string& name, const fs::path& mtx,
                        const std::string& checksum) {
    FileLock lock(cache_dir / "manifest.lock");
    const fs::path mpath = cache_dir / "manifest.csv";
    MatrixManifest m = fs::exists(mpath) ? MatrixManifest::load(mpath) : MatrixManifest{};
    if (const auto* e = m.find(name); e && e->checksum == checksum) return;
    SparseMatrix a = load_matrix(mtx);
    m.upsert({name, fs::relative(mtx, cache_dir).string(), a.n(), a.nnz(), checksum});
    m.save(mpath);
}

}  // namespace

HttpResponse CurlTransport::get(const std::string& url) {
    static const bool initialized = [] { return curl_global_init(CURL_GLOBAL_DEFAULT) == CURLE_OK; }();
    if (!initialized) throw IoError("libcurl initialization failed");
    CURL* curl = curl_easy_init();
    if (!curl) throw IoError("libcurl handle creation failed");
    HttpResponse resp;
    curl_easy_setopt(curl, CURLOPT_URL, url.c_str());
    curl_easy_setopt(curl, CURLOPT_FOLLOWLOCATION, 1L);
    curl_easy_setopt(curl, CURLOPT_WRITEFUNCTION, curl_sink);
    curl_easy_setopt(curl, CURLOPT_WRITEDATA, &resp.body);
    curl_easy_setopt(curl, CURLOPT_FAILONERROR, 0L);
    CURLcode rc = curl_easy_perform(curl);
    curl_easy_getinfo(curl, CURLINFO_RESPONSE_CODE, &resp.status);
    curl_easy_cleanup(curl);
    if (rc != CURLE_OK) throw IoError("HTTP request failed for " + url + ": " + curl_easy_strerror(rc));
    return resp;
}

fs::path resolve_cache_dir(const std::optional<std::string>& flag) {
    if (flag && !flag->empty()) return *flag;
    if (const char* env = std::getenv(kCacheDirEnv); env && *env) return env;
    if (const char* home = std::getenv("HOME"); home && *home) return fs::path(home) / ".cache" / "precsel";
    return fs::temp_directory_path() / "precsel-cache";
}

std::string gunzip(const std::string& compressed) {
    z_stream zs{};
    if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) throw IoError("zlib init failed");
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(compressed.data()));
    zs.avail_in = static_cast<uInt>(compressed.size());
    std::string out;
    char buf[1 << 16];
    int rc = Z_OK;
    do {
        zs.next_out = reinterpret_cast<Bytef*>(buf);
        zs.avail_out = sizeof buf;
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw IoError("archive extraction failed: corrupt gzip stream");
        }
        out.append(buf, sizeof buf - zs.avail_out);
    } while (rc != Z_STREAM_END && (zs.avail_in > 0 || zs.avail_out == 0));
    inflateEnd(&zs);
    if (rc != Z_STREAM_END) throw IoError("archive extraction failed: truncated gzip stream");
    return out;
}

std::optional<std::string> tar_extract(const std::string& tar, const std::string& member_name) {
    constexpr std::size_t block = 512;
    std::size_t pos = 0;
    std::string long_name;
    while (pos + block <= tar.size()) {
        const char* h = tar.data() + pos;
        if (h[0] == '\0') break;  // end-of-archive marker
        std::string name(h, strnlen(h, 100));
        std::string prefix(h + 345, strnlen(h + 345, 155));
        if (!prefix.empty()) name = prefix + "/" + name;
        if (!long_name.empty()) {
            name = long_name;
            long_name.clear();
        }
        std::size_t size = std::strtoull(std::string(h + 124, 12).c_str(), nullptr, 8);
        char type = h[156];
        std::size_t data = pos + block;
        if (data + size > tar.size()) throw IoError("archive extraction failed: truncated tar member " + name);
        if (type == 'L') {
            long_name.assign(tar.data() + data, strnlen(tar.data() + data, size));
        } else if (type == '0' || type == '\0') {
            auto slash = name.find_last_of('/');
            std::string base = slash == std::string::npos ? name : name.substr(slash + 1);
            if (base == member_name) return tar.substr(data, size);
        }
        pos = data + (size + block - 1) / block * block;
    }
    return std::nullopt;
}

fs::path fetch_matrix(const std::string& collection_name, const fs::path& cache_dir, HttpTransport& transport,
                      const std::string& base_url) {
    auto slash = collection_name.find('/');
    if (slash == std::string::npos || slash == 0 || slash + 1 == collection_name.size() ||
        collection_name.find('/', slash + 1) != std::string::npos)
        throw NotFoundError("collection name must look like Group/Name, got '" + collection_name + "'");
    const std::string group = collection_name.substr(0, slash);
    const std::string name = collection_name.substr(slash + 1);

    const fs::path dir = cache_dir / group;
    fs::create_directories(dir);
    const fs::path mtx = dir / (name + ".mtx");
    const fs::path sidecar = dir / (name + ".mtx.sha256");

    {
        FileLock lock(dir / (name + ".lock"));
        bool cached = fs::exists(mtx) && fs::exists(sidecar) && trim(read_text(sidecar)) == sha256_file(mtx);
        if (!cached) {
            const std::string url = base_url + "/" + group + "/" + name + ".tar.gz";
            HttpResponse resp = transport.get(url);
            if (resp.status == 404) throw NotFoundError("matrix not found in collection: " + collection_name);
            if (resp.status != 200)
                throw IoError("HTTP " + std::to_string(resp.status) + " fetching " + url);
            auto member = tar_extract(gunzip(resp.body), name + ".mtx");
            if (!member) throw IoError("archive extraction failed: " + name + ".mtx not in archive");
            const fs::path tmp = dir / (name + ".mtx.part");
            write_text(tmp, *member);
            fs::rename(tmp, mtx);
            write_text(sidecar, sha256_bytes(*member) + "\n");
        }
    }
    record_in_manifest(cache_dir, collection_name, mtx, trim(read_text(sidecar)));
    return mtx;
}

fs::path fetch_matrix(const std::string& collection_name, const fs::path& cache_dir) {
    CurlTransport transport;
    return fetch_matrix(collection_name, cache_dir, transport);
}

}  // namespace precsel
