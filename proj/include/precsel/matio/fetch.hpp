#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace precsel {

struct HttpResponse {
    long status = 0;
    std::string body;
};

/// Minimal HTTP GET seam so the fetcher can be exercised offline.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    /// Throws IoError on transport-level failure; HTTP status is reported, not thrown.
    virtual HttpResponse get(const std::string& url) = 0;
};

/// libcurl-backed transport.
class CurlTransport final : public HttpTransport {
public:
    HttpResponse get(const std::string& url) override;
};

inline constexpr const char* kCollectionBaseUrl = "https://sparse.tamu.edu/MM";
inline constexpr const char* kCacheDirEnv = "PRECSEL_CACHE_DIR";

/// `flag` if given, else $PRECSEL_CACHE_DIR, else ~/.cache/precsel.
std::filesystem::path resolve_cache_dir(const std::optional<std::string>& flag);

/// Downloads `Group/Name` from the SuiteSparse collection into the cache and
/// returns the path of the extracted `.mtx`.
///
/// Cache layout: `<cache>/<Group>/<Name>.mtx` with a `<Name>.mtx.sha256`
/// sidecar, plus `<cache>/manifest.csv`. A cached file whose checksum matches
/// the sidecar is returned without touching the network. Concurrent fetches
/// of one name are serialized through `<cache>/<Group>/<Name>.lock`.
///
/// Throws NotFoundError for HTTP 404 or a malformed name, IoError for other
/// HTTP or extraction failures.
std::filesystem::path fetch_matrix(const std::string& collection_name, const std::filesystem::path& cache_dir,
                                   HttpTransport& transport, const std::string& base_url = kCollectionBaseUrl);

std::filesystem::path fetch_matrix(const std::string& collection_name, const std::filesystem::path& cache_dir);

/// Inflates a gzip stream.
std::string gunzip(const std::string& compressed);

/// Returns the contents of the first regular member of a tar archive whose
/// base name equals `member_name`, or nullopt.
std::optional<std::string> tar_extract(const std::string& tar, const std::string& member_name);

}  // namespace precsel
