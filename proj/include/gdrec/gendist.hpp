// Pairwise genetic distances under nucleotide substitution models
// (p-distance, JC69, K2P, and a composite-likelihood TN93 variant with
// pooled base frequencies), plus bootstrap uncertainty.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gdrec/common.hpp"
#include "gdrec/seqio.hpp"

namespace gdrec::gendist {

enum class ModelTag { P_DIST, JC69, K2P, TN93_MCL };

ModelTag model_from_string(const std::string& name);
std::string model_name(ModelTag model);

struct PairCounts {
    long compared_sites = 0;
    long transitions_AG = 0;   // A<->G
    long transitions_CT = 0;   // C<->T
    long transversions = 0;
    std::array<long, 4> base_counts{};  // A,C,G,T over both sequences

    PairCounts& operator+=(const PairCounts& o);
};

// Base frequencies shared across all pairs ("composite" pooling for TN93).
struct PooledParams {
    std::array<double, 4> pi{};  // A,C,G,T

    static PooledParams from_counts(const PairCounts& total);
};

struct DistanceMatrix {
    std::vector<std::string> labels;
    std::vector<double> values;  // N*N row-major, symmetric, zero diagonal
    ModelTag model = ModelTag::P_DIST;
    std::vector<double> stderr_values;  // empty or N*N
    std::vector<double> ci_lower;       // empty or N*N (2.5th percentile)
    std::vector<double> ci_upper;       // empty or N*N (97.5th percentile)

    std::size_t size() const { return labels.size(); }
    double at(std::size_t i, std::size_t j) const { return values[i * size() + j]; }
    double& at(std::size_t i, std::size_t j) { return values[i * size() + j]; }
    void validate() const;  // symmetry, zero diagonal, finite, nonnegative
};

enum class Deletion { Pairwise, CompleteMask };

// Sites where either residue is '-' or 'N' are excluded. For CompleteMask
// the caller supplies the column mask (true = use column).
PairCounts pair_counts(const std::string& a, const std::string& b,
                       Deletion deletion = Deletion::Pairwise,
                       const std::vector<bool>* mask = nullptr);

// Columns masked out for complete deletion: any gap or N in any sequence.
std::vector<bool> complete_deletion_mask(const seqio::AlignedSet& aln);

double pairwise_distance(const PairCounts& counts, ModelTag model,
                         const std::optional<PooledParams>& pooled = std::nullopt);

DistanceMatrix distance_matrix(const seqio::AlignedSet& aln, ModelTag model,
                               Deletion deletion = Deletion::Pairwise,
                               Exec exec = Exec::Parallel);

// B column resamples with replacement. Replicate b draws its columns from
// Rng(Rng::child(seed, b)) as L successive below(L) calls; per-pair stderr
// is the (B-1)-denominator sample deviation over surviving replicates and
// the CI bounds are linearly interpolated 2.5/97.5 percentiles. Replicates
// whose distance is undefined for a pair (saturation / no comparable sites)
// are skipped for that pair; more than B/2 skips is an error.
DistanceMatrix bootstrap_se(const seqio::AlignedSet& aln, ModelTag model,
                            int B, std::uint64_t seed,
                            Deletion deletion = Deletion::Pairwise,
                            Exec exec = Exec::Parallel);

// Square CSV with label header row + label column. Reading checks that the
// two triangles agree within 1e-12.
std::string write_csv(const DistanceMatrix& dm);
void write_csv_file(const DistanceMatrix& dm, const std::string& path);
DistanceMatrix read_csv(const std::string& text);
DistanceMatrix read_csv_file(const std::string& path);

}  // namespace gdrec::gendist
