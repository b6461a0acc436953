// Genetic-distance rows as a representation space: nearest-row
// classification, zero-shot extension, k-means purity, and predicted-row
// insertion for joint trees.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gdrec/common.hpp"
#include "gdrec/gendist.hpp"

namespace gdrec::embed {

enum class MetricTag { COSINE, EUCLIDEAN, MANHATTAN, CORRELATION };

MetricTag metric_from_string(const std::string& name);
std::string metric_name(MetricTag metric);

struct EmbeddingMatrix {
    std::vector<std::string> row_labels;  // N species
    std::vector<std::string> col_labels;  // L reference entries, L >= N allowed
    std::vector<double> values;           // N*L row-major

    std::size_t rows() const { return row_labels.size(); }
    std::size_t cols() const { return col_labels.size(); }
    double at(std::size_t i, std::size_t j) const { return values[i * cols() + j]; }
    double& at(std::size_t i, std::size_t j) { return values[i * cols() + j]; }
    std::vector<double> row(std::size_t i) const;

    static EmbeddingMatrix from_distance_matrix(const gendist::DistanceMatrix& dm);
    EmbeddingMatrix select_columns(const std::vector<std::size_t>& cols) const;
    EmbeddingMatrix select_rows(const std::vector<std::size_t>& rows) const;
};

struct LabelEmbedding {
    std::vector<double> scores;  // one per reference row
    MetricTag metric = MetricTag::COSINE;
};

double metric_distance(const std::vector<double>& a, const std::vector<double>& b,
                       MetricTag metric);

LabelEmbedding label_embedding(const std::vector<double>& pred,
                               const EmbeddingMatrix& refmat, MetricTag metric);

// Argmin over reference rows; ties break on the smallest row index.
std::pair<std::string, LabelEmbedding> classify(const std::vector<double>& pred,
                                                const EmbeddingMatrix& refmat,
                                                MetricTag metric);

std::vector<std::string> classify_batch(const std::vector<std::vector<double>>& preds,
                                        const EmbeddingMatrix& refmat,
                                        MetricTag metric,
                                        Exec exec = Exec::Parallel);

enum class ZeroShotMode { ZSL, GZSL };

std::string zero_shot_classify(const std::vector<double>& pred,
                               const EmbeddingMatrix& seen,
                               const EmbeddingMatrix& unseen, ZeroShotMode mode,
                               MetricTag metric);

struct KMeansResult {
    std::vector<int> assignments;
    double purity = 0.0;
    std::vector<std::vector<double>> centroids;
    int iterations = 0;
};

// Lloyd's algorithm with k-means++ seeding from the project RNG; empty
// clusters re-seed on the point farthest from its centroid.
KMeansResult kmeans_purity(const std::vector<std::vector<double>>& points,
                           const std::vector<std::string>& true_labels, int k,
                           std::uint64_t seed, int max_iterations = 100);

// (N+1)x(N+1) matrix with the predicted row joined as `query_label`.
// col_map[j] names the species reference column j refers to; predicted
// entries mapping to the same species are averaged, negatives clamp to 0
// (recorded in `warnings`).
gendist::DistanceMatrix insert_predicted_row(
    const gendist::DistanceMatrix& species_dm, const std::vector<double>& pred,
    const std::vector<std::string>& col_map, const std::string& query_label,
    std::vector<std::string>* warnings = nullptr);

// CSV io: row labels in the first column, column labels in the header.
std::string write_embedding_csv(const EmbeddingMatrix& m);
void write_embedding_csv_file(const EmbeddingMatrix& m, const std::string& path);
EmbeddingMatrix read_embedding_csv(const std::string& text);
EmbeddingMatrix read_embedding_csv_file(const std::string& path);

}  // namespace gdrec::embed
