#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "precsel/error.hpp"
#include "precsel/krylov/pcg.hpp"
#include "precsel/matio/manifest.hpp"
#include "precsel/matio/sparse_matrix.hpp"

namespace precsel {

inline constexpr int kSystemsPerSuite = 10;

struct LinearSystem {
    std::vector<double> x_star;
    std::vector<double> b;  // A * x_star
};

struct RhsSuite {
    std::string matrix_id;
    std::uint64_t seed = 0;
    std::vector<LinearSystem> systems;
};

/// Ten systems with x* entries drawn i.i.d. from N(0, 1) under `seed`.
RhsSuite generate_rhs_suite(const SparseMatrix& a, std::uint64_t seed, std::string matrix_id = {});

struct TimingOptions {
    int reps = 5;
    double time_limit = 60.0;  // seconds, applied to the sum of medians
    double max_rel_residual = 0.01;
    double max_rel_error = 0.1;
    bool warmup = true;
    PcgOptions solver;  // observer and time_limit are managed by time_pair
    PrecondOptions precond;
};

struct PairTiming {
    std::string matrix_id;
    PrecondKind kind = PrecondKind::NONE;
    std::vector<double> per_system_median;  // seconds; may be short when measurement stopped early
    double total_time = std::numeric_limits<double>::infinity();  // sum of medians, +inf if infeasible
    double worst_rel_residual = std::numeric_limits<double>::infinity();
    double worst_rel_error = std::numeric_limits<double>::infinity();
    std::vector<int> iterations;  // per system, from the last run
    bool feasible = false;
    std::string failure;  // empty when feasible
};

/// Every timed solver run in the process goes through this lock.
std::mutex& measurement_mutex();

/// Median-of-reps timing of setup + solve for each system of the suite.
/// Failures are encoded in the record, never thrown.
PairTiming time_pair(const SparseMatrix& a, PrecondKind kind, const RhsSuite& suite, const TimingOptions& opts = {});

class Unlabelable : public DataError {
public:
    using DataError::DataError;
};

struct LabelRecord {
    std::string matrix_id;
    std::vector<PrecondKind> optimal;  // sorted by enum order
    double t_star = 0.0;
    std::vector<PairTiming> timings;

    bool is_optimal(PrecondKind k) const;
    /// total_time of `k`, or +inf when it was not timed.
    double total_time(PrecondKind k) const;
};

/// t* = min feasible total time; Y = {k : feasible and total <= band * t*}.
/// Throws Unlabelable when nothing is feasible.
LabelRecord optimal_set(const std::string& matrix_id, const std::vector<PairTiming>& timings, double band = 1.1);

struct LabelStats {
    std::map<int, int> optimal_set_sizes;     // |Y| -> number of matrices
    std::map<PrecondKind, int> optimal_count;  // kind -> matrices where it is optimal
    double mean_optimal = 0.0;
    double single_optimal_fraction = 0.0;
};

LabelStats label_statistics(const std::vector<LabelRecord>& records);

struct LabelDataset {
    std::vector<LabelRecord> records;
    std::map<std::string, std::string> failures;  // matrix_id -> reason
    LabelStats stats;
};

struct LabelJob {
    std::string matrix_id;
    std::function<SparseMatrix()> load;
};

/// Per-matrix RHS seed derived from the run seed and the matrix id.
std::uint64_t matrix_seed(std::uint64_t seed, const std::string& matrix_id);

LabelDataset build_label_dataset(const std::vector<LabelJob>& jobs, const std::vector<PrecondKind>& kinds,
                                 std::uint64_t seed, const TimingOptions& opts = {},
                                 const std::function<void(const std::string&)>& progress = {});
LabelDataset build_label_dataset(const MatrixManifest& manifest, const std::vector<PrecondKind>& kinds,
                                 std::uint64_t seed, const TimingOptions& opts = {},
                                 const std::function<void(const std::string&)>& progress = {});

/// JSON lines; infinite times are written as the string "inf".
void write_label_records(const std::filesystem::path& path, const std::vector<LabelRecord>& records);
std::vector<LabelRecord> read_label_records(const std::filesystem::path& path);

}  // namespace precsel
