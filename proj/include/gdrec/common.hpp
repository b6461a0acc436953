// Shared infrastructure: error hierarchy, the seeded RNG used everywhere,
// and the serial/parallel execution switch for the data-parallel kernels.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace gdrec {

// ---------------------------------------------------------------------------
// Errors. Every failure mode named by a module contract gets its own type so
// callers (and tests) can catch precisely.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define GDREC_DEFINE_ERROR(NAME)                                   \
    class NAME : public Error {                                    \
    public:                                                        \
        explicit NAME(const std::string& msg) : Error(msg) {}      \
    }

GDREC_DEFINE_ERROR(AlignmentLengthError);
GDREC_DEFINE_ERROR(DuplicateLabelError);
GDREC_DEFINE_ERROR(ResidueError);
GDREC_DEFINE_ERROR(EmptyTrimError);
GDREC_DEFINE_ERROR(NoComparableSitesError);
GDREC_DEFINE_ERROR(SaturationError);
GDREC_DEFINE_ERROR(BootstrapDegenerateError);
GDREC_DEFINE_ERROR(ReadSymmetryError);
GDREC_DEFINE_ERROR(NumericalError);
GDREC_DEFINE_ERROR(NewickParseError);
GDREC_DEFINE_ERROR(DegenerateVectorError);
GDREC_DEFINE_ERROR(ReferenceMismatchError);
GDREC_DEFINE_ERROR(KMeansConfigError);
GDREC_DEFINE_ERROR(ShapeError);
GDREC_DEFINE_ERROR(TapeError);
GDREC_DEFINE_ERROR(TargetError);
GDREC_DEFINE_ERROR(DataError);
GDREC_DEFINE_ERROR(StageError);
GDREC_DEFINE_ERROR(LabelError);
GDREC_DEFINE_ERROR(MetricError);
GDREC_DEFINE_ERROR(ConfigError);
GDREC_DEFINE_ERROR(IoError);

#undef GDREC_DEFINE_ERROR

// ---------------------------------------------------------------------------
// Rng: SplitMix64. This is the project RNG; all stochastic procedures
// (bootstrap resampling, initialization, sampling, k-means++ seeding) draw
// from it so traces are bit-reproducible across platforms.
//
// Documented derivations:
//   u64     : state += 0x9E3779B97F4A7C15, then the SplitMix64 finalizer.
//   unit    : (u64() >> 11) * 2^-53, uniform in [0, 1).
//   below(n): u64() % n.
//   normal  : Box-Muller, z = sqrt(-2 ln(1-u1)) * cos(2 pi u2), one value
//             per call (no spare caching).
//   poisson : Knuth inversion, multiply unit draws until < exp(-lambda).
//   child(seed, k): SplitMix64 finalizer applied to
//             seed + (k+1)*0x9E3779B97F4A7C15 — used to derive independent
//             per-replicate / per-stream seeds.
// ---------------------------------------------------------------------------

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    double unit() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

    std::uint64_t below(std::uint64_t n) { return u64() % n; }

    double normal() {
        double u1 = unit();
        double u2 = unit();
        return std::sqrt(-2.0 * std::log(1.0 - u1)) *
               std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    double exponential(double mean) { return -mean * std::log(1.0 - unit()); }

    int poisson(double lambda) {
        double limit = std::exp(-lambda);
        int k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= unit();
        } while (p > limit);
        return k - 1;
    }

    static std::uint64_t child(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t z = seed + (stream + 1) * 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Execution policy for the data-parallel kernels. Parallel variants must be
// bit-identical to the serial reference: every output element is owned by
// exactly one thread, so no cross-thread reductions occur.
// ---------------------------------------------------------------------------

enum class Exec { Serial, Parallel };

template <typename Fn>
void parallel_for(long n, Exec exec, Fn&& fn) {
    if (exec == Exec::Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
        for (long i = 0; i < n; ++i) fn(i);
        return;
#endif
    }
    for (long i = 0; i < n; ++i) fn(i);
}

}  // namespace gdrec
