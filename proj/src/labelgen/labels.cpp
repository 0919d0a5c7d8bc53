#include "precsel/labelgen/labels.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <random>

#include "precsel/matio/matrix_market.hpp"

namespace precsel {
namespace {

using json = nlohmann::ordered_json;
constexpr double kInf = std::numeric_limits<double>::infinity();

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

const char* status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::max_iterations: return "iteration cap";
        case SolveStatus::time_limit: return "time limit";
        case SolveStatus::indefinite: return "indefinite";
        case SolveStatus::diverged: return "diverged";
    }
    return "unknown";
}

json time_value(double t) {
    if (std::isinf(t)) return "inf";
    return t;
}

double parse_time(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return kInf;
        throw ParseError("bad time value '" + j.get<std::string>() + "'");
    }
    return j.get<double>();
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

RhsSuite generate_rhs_suite(const SparseMatrix& a, std::uint64_t seed, std::string matrix_id) {
    RhsSuite suite;
    suite.matrix_id = std::move(matrix_id);
    suite.seed = seed;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    suite.systems.resize(kSystemsPerSuite);
    for (auto& sys : suite.systems) {
        sys.x_star.resize(a.n());
        for (double& v : sys.x_star) v = normal(rng);
        sys.b = a.multiply(sys.x_star);
    }
    return suite;
}

std::mutex& measurement_mutex() {
    static std::mutex m;
    return m;
}

PairTiming time_pair(const SparseMatrix& a, PrecondKind kind, const RhsSuite& suite, const TimingOptions& opts) {
    if (opts.reps < 1) throw ContractError("time_pair needs reps >= 1");
    using clock = std::chrono::steady_clock;
    std::lock_guard<std::mutex> lock(measurement_mutex());

    PairTiming out;
    out.matrix_id = suite.matrix_id;
    out.kind = kind;
    PcgOptions sopt = opts.solver;
    sopt.observer = nullptr;
    sopt.time_limit = std::min(sopt.time_limit, opts.time_limit);

    auto run_once = [&](const LinearSystem& sys) {
        auto m = build_preconditioner(a, kind, opts.precond);
        return pcg_solve(a, sys.b, *m, sopt);
    };

    try {
        if (opts.warmup && !suite.systems.empty()) run_once(suite.systems.front());
    } catch (const DataError& e) {
        out.failure = std::string("setup failed: ") + e.what();
        return out;
    }

    double running = 0.0, worst_res = 0.0, worst_err = 0.0;
    for (std::size_t s = 0; s < suite.systems.size() && out.failure.empty(); ++s) {
        const LinearSystem& sys = suite.systems[s];
        std::vector<double> times;
        SolveResult last;
        try {
            for (int rep = 0; rep < opts.reps; ++rep) {
                const auto t0 = clock::now();
                last = run_once(sys);
                times.push_back(std::chrono::duration<double>(clock::now() - t0).count());
                if (!last.converged || times.back() >= opts.time_limit) break;
            }
        } catch (const DataError& e) {
            out.failure = std::string("setup failed: ") + e.what();
            break;
        }
        const double med = median(times);
        out.per_system_median.push_back(med);
        out.iterations.push_back(last.iterations);
        running += med;
        worst_res = std::max(worst_res, last.rel_residual);
        worst_err = std::max(worst_err, relative_error(last.x, sys.x_star));
        if (!last.converged)
            out.failure = std::string("system ") + std::to_string(s) + ": " + status_name(last.status);
        else if (running >= opts.time_limit)
            out.failure = "time limit exceeded";
    }
    out.worst_rel_residual = worst_res;
    out.worst_rel_error = worst_err;
    if (out.failure.empty()) {
        if (!(worst_res < opts.max_rel_residual))
            out.failure = "residual threshold";
        else if (!(worst_err < opts.max_rel_error))
            out.failure = "error threshold";
    }
    out.feasible = out.failure.empty() && running < opts.time_limit;
    out.total_time = out.feasible ? running : kInf;
    return out;
}

bool LabelRecord::is_optimal(PrecondKind k) const { return std::find(optimal.begin(), optimal.end(), k) != optimal.end(); }

double LabelRecord::total_time(PrecondKind k) const {
    for (const auto& t : timings)
        if (t.kind == k) return t.feasible ? t.total_time : kInf;
    return kInf;
}

LabelRecord optimal_set(const std::string& matrix_id, const std::vector<PairTiming>& timings, double band) {
    LabelRecord rec;
    rec.matrix_id = matrix_id;
    rec.timings = timings;
    double t_star = kInf;
    for (const auto& t : timings)
        if (t.feasible) t_star = std::min(t_star, t.total_time);
    if (std::isinf(t_star)) throw Unlabelable("no feasible preconditioner for " + matrix_id);
    rec.t_star = t_star;
    for (const auto& t : timings)
        if (t.feasible && t.total_time <= band * t_star) rec.optimal.push_back(t.kind);
    std::sort(rec.optimal.begin(), rec.optimal.end());
    rec.optimal.erase(std::unique(rec.optimal.begin(), rec.optimal.end()), rec.optimal.end());
    return rec;
}

LabelStats label_statistics(const std::vector<LabelRecord>& records) {
    LabelStats s;
    std::size_t total = 0, single = 0;
    for (const auto& r : records) {
        ++s.optimal_set_sizes[static_cast<int>(r.optimal.size())];
        for (PrecondKind k : r.optimal) ++s.optimal_count[k];
        total += r.optimal.size();
        single += r.optimal.size() == 1;
    }
    if (!records.empty()) {
        s.mean_optimal = static_cast<double>(total) / static_cast<double>(records.size());
        s.single_optimal_fraction = static_cast<double>(single) / static_cast<double>(records.size());
    }
    return s;
}

std::uint64_t matrix_seed(std::uint64_t seed, const std::string& matrix_id) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : matrix_id) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(seed ^ splitmix64(h));
}

LabelDataset build_label_dataset(const std::vector<LabelJob>& jobs, const std::vector<PrecondKind>& kinds,
                                 std::uint64_t seed, const TimingOptions& opts,
                                 const std::function<void(const std::string&)>& progress) {
    LabelDataset ds;
    for (const auto& job : jobs) {
        if (progress) progress(job.matrix_id);
        try {
            SparseMatrix a = job.load();
            RhsSuite suite = generate_rhs_suite(a, matrix_seed(seed, job.matrix_id), job.matrix_id);
            std::vector<PairTiming> timings;
            for (PrecondKind k : kinds) timings.push_back(time_pair(a, k, suite, opts));
            ds.records.push_back(optimal_set(job.matrix_id, timings));
        } catch (const DataError& e) {
            ds.failures[job.matrix_id] = e.what();
        }
    }
    ds.stats = label_statistics(ds.records);
    return ds;
}

LabelDataset build_label_dataset(const MatrixManifest& manifest, const std::vector<PrecondKind>& kinds,
                                 std::uint64_t seed, const TimingOptions& opts,
                                 const std::function<void(const std::string&)>& progress) {
    std::vector<LabelJob> jobs;
    for (const auto& e : manifest.entries()) {
        auto path = manifest.resolve(e);
        jobs.push_back({e.matrix_id, [path] { return load_matrix(path); }});
    }
    return build_label_dataset(jobs, kinds, seed, opts, progress);
}

void write_label_records(const std::filesystem::path& path, const std::vector<LabelRecord>& records) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& r : records) {
        json j;
        j["matrix_id"] = r.matrix_id;
        j["t_star"] = time_value(r.t_star);
        j["optimal"] = json::array();
        for (PrecondKind k : r.optimal) j["optimal"].push_back(std::string(to_string(k)));
        json t = json::object();
        for (const auto& p : r.timings) {
            json e;
            e["total_time"] = time_value(p.total_time);
            e["feasible"] = p.feasible;
            e["per_system_median"] = p.per_system_median;
            e["worst_rel_residual"] = time_value(p.worst_rel_residual);
            e["worst_rel_error"] = time_value(p.worst_rel_error);
            e["iterations"] = p.iterations;
            if (!p.failure.empty()) e["failure"] = p.failure;
            t[std::string(to_string(p.kind))] = std::move(e);
        }
        j["timings"] = std::move(t);
        out << j.dump() << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<LabelRecord> read_label_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<LabelRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            json j = json::parse(line);
            LabelRecord r;
            r.matrix_id = j.at("matrix_id").get<std::string>();
            r.t_star = parse_time(j.at("t_star"));
            for (const auto& k : j.at("optimal")) r.optimal.push_back(parse_precond_kind(k.get<std::string>()));
            for (const auto& [name, e] : j.at("timings").items()) {
                PairTiming p;
                p.matrix_id = r.matrix_id;
                p.kind = parse_precond_kind(name);
                p.total_time = parse_time(e.at("total_time"));
                p.feasible = e.at("feasible").get<bool>();
                if (e.contains("per_system_median")) p.per_system_median = e["per_system_median"].get<std::vector<double>>();
                if (e.contains("worst_rel_residual")) p.worst_rel_residual = parse_time(e["worst_rel_residual"]);
                if (e.contains("worst_rel_error")) p.worst_rel_error = parse_time(e["worst_rel_error"]);
                if (e.contains("iterations")) p.iterations = e["iterations"].get<std::vector<int>>();
                if (e.contains("failure")) p.failure = e["failure"].get<std::string>();
                r.timings.push_back(std::move(p));
            }
            out.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace precsel
