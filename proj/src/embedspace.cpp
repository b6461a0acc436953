#include "gdrec/embedspace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace gdrec::embed {

MetricTag metric_from_string(const std::string& name) {
    if (name == "COSINE") return MetricTag::COSINE;
    if (name == "EUCLIDEAN") return MetricTag::EUCLIDEAN;
    if (name == "MANHATTAN") return MetricTag::MANHATTAN;
    if (name == "CORRELATION") return MetricTag::CORRELATION;
    throw ConfigError("unknown metric: " + name);
}

std::string metric_name(MetricTag metric) {
    switch (metric) {
        case MetricTag::COSINE: return "COSINE";
        case MetricTag::EUCLIDEAN: return "EUCLIDEAN";
        case MetricTag::MANHATTAN: return "MANHATTAN";
        case MetricTag::CORRELATION: return "CORRELATION";
    }
    return "?";
}

std::vector<double> EmbeddingMatrix::row(std::size_t i) const {
    return {values.begin() + static_cast<long>(i * cols()),
            values.begin() + static_cast<long>((i + 1) * cols())};
}

EmbeddingMatrix EmbeddingMatrix::from_distance_matrix(const gendist::DistanceMatrix& dm) {
    EmbeddingMatrix m;
    m.row_labels = dm.labels;
    m.col_labels = dm.labels;
    m.values = dm.values;
    return m;
}

EmbeddingMatrix EmbeddingMatrix::select_columns(const std::vector<std::size_t>& cs) const {
    EmbeddingMatrix out;
    out.row_labels = row_labels;
    for (std::size_t c : cs) {
        if (c >= cols()) throw ShapeError("select_columns: index out of range");
        out.col_labels.push_back(col_labels[c]);
    }
    out.values.reserve(rows() * cs.size());
    for (std::size_t i = 0; i < rows(); ++i)
        for (std::size_t c : cs) out.values.push_back(at(i, c));
    return out;
}

EmbeddingMatrix EmbeddingMatrix::select_rows(const std::vector<std::size_t>& rs) const {
    EmbeddingMatrix out;
    out.col_labels = col_labels;
    for (std::size_t r : rs) {
        if (r >= rows()) throw ShapeError("select_rows: index out of range");
        out.row_labels.push_back(row_labels[r]);
        for (std::size_t j = 0; j < cols(); ++j) out.values.push_back(at(r, j));
    }
    return out;
}

double metric_distance(const std::vector<double>& a, const std::vector<double>& b,
                       MetricTag metric) {
    if (a.size() != b.size()) throw ShapeError("metric_distance: length mismatch");
    const std::size_t n = a.size();
    switch (metric) {
        case MetricTag::EUCLIDEAN: {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double d = a[i] - b[i];
                s += d * d;
            }
            return std::sqrt(s);
        }
        case MetricTag::MANHATTAN: {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += std::abs(a[i] - b[i]);
            return s;
        }
        case MetricTag::COSINE: {
            double dot = 0.0, na = 0.0, nb = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                dot += a[i] * b[i];
                na += a[i] * a[i];
                nb += b[i] * b[i];
            }
            if (na == 0.0 || nb == 0.0)
                throw DegenerateVectorError("cosine distance: zero vector");
            return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
        }
        case MetricTag::CORRELATION: {
            double ma = 0.0, mb = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                ma += a[i];
                mb += b[i];
            }
            ma /= static_cast<double>(n);
            mb /= static_cast<double>(n);
            double dot = 0.0, va = 0.0, vb = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                dot += (a[i] - ma) * (b[i] - mb);
                va += (a[i] - ma) * (a[i] - ma);
                vb += (b[i] - mb) * (b[i] - mb);
            }
            if (va == 0.0 || vb == 0.0)
                throw DegenerateVectorError("correlation distance: zero variance");
            return 1.0 - dot / (std::sqrt(va) * std::sqrt(vb));
        }
    }
    throw ConfigError("unknown metric");
}

LabelEmbedding label_embedding(const std::vector<double>& pred,
                               const EmbeddingMatrix& refmat, MetricTag metric) {
    if (pred.size() != refmat.cols())
        throw ShapeError("label_embedding: prediction length " +
                         std::to_string(pred.size()) + " != reference columns " +
                         std::to_string(refmat.cols()));
    LabelEmbedding le;
    le.metric = metric;
    le.scores.reserve(refmat.rows());
    for (std::size_t i = 0; i < refmat.rows(); ++i)
        le.scores.push_back(metric_distance(pred, refmat.row(i), metric));
    return le;
}

std::pair<std::string, LabelEmbedding> classify(const std::vector<double>& pred,
                                                const EmbeddingMatrix& refmat,
                                                MetricTag metric) {
    LabelEmbedding le = label_embedding(pred, refmat, metric);
    std::size_t best = 0;
    for (std::size_t i = 1; i < le.scores.size(); ++i)
        if (le.scores[i] < le.scores[best]) best = i;
    return {refmat.row_labels[best], std::move(le)};
}

std::vector<std::string> classify_batch(const std::vector<std::vector<double>>& preds,
                                        const EmbeddingMatrix& refmat,
                                        MetricTag metric, Exec exec) {
    std::vector<std::string> out(preds.size());
    parallel_for(static_cast<long>(preds.size()), exec, [&](long i) {
        out[static_cast<std::size_t>(i)] =
            classify(preds[static_cast<std::size_t>(i)], refmat, metric).first;
    });
    return out;
}

std::string zero_shot_classify(const std::vector<double>& pred,
                               const EmbeddingMatrix& seen,
                               const EmbeddingMatrix& unseen, ZeroShotMode mode,
                               MetricTag metric) {
    if (seen.col_labels != unseen.col_labels)
        throw ReferenceMismatchError(
            "zero_shot_classify: seen/unseen column labels differ");
    if (mode == ZeroShotMode::ZSL) return classify(pred, unseen, metric).first;
    // GZSL: argmin over the concatenation, seen rows first
    EmbeddingMatrix joint = seen;
    for (std::size_t i = 0; i < unseen.rows(); ++i) {
        joint.row_labels.push_back(unseen.row_labels[i]);
        for (std::size_t j = 0; j < unseen.cols(); ++j)
            joint.values.push_back(unseen.at(i, j));
    }
    return classify(pred, joint, metric).first;
}

namespace {

double sq_euclidean(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

}  // namespace

KMeansResult kmeans_purity(const std::vector<std::vector<double>>& points,
                           const std::vector<std::string>& true_labels, int k,
                           std::uint64_t seed, int max_iterations) {
    if (points.empty()) throw KMeansConfigError("kmeans: no points");
    if (k < 1) throw KMeansConfigError("kmeans: k must be >= 1");
    if (static_cast<std::size_t>(k) > points.size())
        throw KMeansConfigError("kmeans: k exceeds number of points");
    if (true_labels.size() != points.size())
        throw KMeansConfigError("kmeans: labels/points length mismatch");
    const std::size_t n = points.size();
    const std::size_t dim = points[0].size();
    for (const auto& p : points)
        if (p.size() != dim) throw ShapeError("kmeans: ragged points");

    Rng rng(seed);
    std::vector<std::vector<double>> centroids;
    centroids.reserve(static_cast<std::size_t>(k));

    // k-means++ seeding
    centroids.push_back(points[rng.below(n)]);
    std::vector<double> d2(n);
    while (centroids.size() < static_cast<std::size_t>(k)) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : centroids) best = std::min(best, sq_euclidean(points[i], c));
            d2[i] = best;
            total += best;
        }
        std::size_t chosen = 0;
        if (total > 0.0) {
            double target = rng.unit() * total;
            double acc = 0.0;
            chosen = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc >= target) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = rng.below(n);  // all points coincide with a centroid
        }
        centroids.push_back(points[chosen]);
    }

    std::vector<int> assign(n, -1);
    int iters = 0;
    for (; iters < max_iterations; ++iters) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double bestd = sq_euclidean(points[i], centroids[0]);
            for (int c = 1; c < k; ++c) {
                double d = sq_euclidean(points[i], centroids[static_cast<std::size_t>(c)]);
                if (d < bestd) {
                    bestd = d;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        if (!changed) break;

        std::vector<std::vector<double>> sums(static_cast<std::size_t>(k),
                                              std::vector<double>(dim, 0.0));
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[static_cast<std::size_t>(assign[i])];
            for (std::size_t d = 0; d < dim; ++d)
                sums[static_cast<std::size_t>(assign[i])][d] += points[i][d];
        }
        for (int c = 0; c < k; ++c) {
            auto cu = static_cast<std::size_t>(c);
            if (counts[cu] > 0) {
                for (std::size_t d = 0; d < dim; ++d)
                    centroids[cu][d] = sums[cu][d] / counts[cu];
            } else {
                // re-seed on the point farthest from its own centroid
                std::size_t far = 0;
                double fard = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    double d = sq_euclidean(
                        points[i], centroids[static_cast<std::size_t>(assign[i])]);
                    if (d > fard) {
                        fard = d;
                        far = i;
                    }
                }
                centroids[cu] = points[far];
            }
        }
    }

    // purity: dominant true label per cluster
    std::vector<std::map<std::string, int>> tally(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < n; ++i)
        ++tally[static_cast<std::size_t>(assign[i])][true_labels[i]];
    long dominant = 0;
    for (const auto& m : tally) {
        int best = 0;
        for (const auto& [lbl, cnt] : m) best = std::max(best, cnt);
        dominant += best;
    }

    KMeansResult res;
    res.assignments = std::move(assign);
    res.purity = static_cast<double>(dominant) / static_cast<double>(n);
    res.centroids = std::move(centroids);
    res.iterations = iters;
    return res;
}

gendist::DistanceMatrix insert_predicted_row(
    const gendist::DistanceMatrix& species_dm, const std::vector<double>& pred,
    const std::vector<std::string>& col_map, const std::string& query_label,
    std::vector<std::string>* warnings) {
    if (pred.size() != col_map.size())
        throw ShapeError("insert_predicted_row: prediction/column map length mismatch");

    const std::size_t n = species_dm.size();
    // average predicted entries per species
    std::map<std::string, std::pair<double, int>> acc;
    for (std::size_t j = 0; j < col_map.size(); ++j) {
        auto& slot = acc[col_map[j]];
        slot.first += pred[j];
        slot.second += 1;
    }
    std::vector<double> to_species(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto it = acc.find(species_dm.labels[i]);
        if (it == acc.end())
            throw ReferenceMismatchError("insert_predicted_row: species '" +
                                         species_dm.labels[i] +
                                         "' not covered by the column map");
        double v = it->second.first / it->second.second;
        if (v < 0.0) {
            if (warnings)
                warnings->push_back("negative predicted distance to " +
                                    species_dm.labels[i] + " clamped to 0");
            v = 0.0;
        }
        to_species[i] = v;
    }

    gendist::DistanceMatrix out;
    out.labels = species_dm.labels;
    out.labels.push_back(query_label);
    out.model = species_dm.model;
    const std::size_t m = n + 1;
    out.values.assign(m * m, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out.values[i * m + j] = species_dm.at(i, j);
    for (std::size_t i = 0; i < n; ++i) {
        out.values[i * m + n] = to_species[i];
        out.values[n * m + i] = to_species[i];
    }
    return out;
}

std::string write_embedding_csv(const EmbeddingMatrix& m) {
    std::ostringstream out;
    out.precision(17);
    out << "label";
    for (const std::string& c : m.col_labels) out << ',' << c;
    out << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        out << m.row_labels[i];
        for (std::size_t j = 0; j < m.cols(); ++j) out << ',' << m.at(i, j);
        out << '\n';
    }
    return out.str();
}

void write_embedding_csv_file(const EmbeddingMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write csv: " + path);
    out << write_embedding_csv(m);
}

EmbeddingMatrix read_embedding_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw IoError("embedding csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        for (char c : s) {
            if (c == ',') { out.push_back(cur); cur.clear(); }
            else cur.push_back(c);
        }
        out.push_back(cur);
        return out;
    };

    std::vector<std::string> header = split(line);
    if (header.size() < 2) throw IoError("embedding csv: bad header");
    EmbeddingMatrix m;
    m.col_labels.assign(header.begin() + 1, header.end());

    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells = split(line);
        if (cells.size() != m.col_labels.size() + 1)
            throw IoError("embedding csv: ragged row '" + cells[0] + "'");
        m.row_labels.push_back(cells[0]);
        for (std::size_t j = 1; j < cells.size(); ++j) {
            try {
                m.values.push_back(std::stod(cells[j]));
            } catch (const std::exception&) {
                throw IoError("embedding csv: bad number '" + cells[j] + "'");
            }
        }
    }
    if (m.row_labels.empty()) throw IoError("embedding csv: no rows");
    return m;
}

EmbeddingMatrix read_embedding_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open csv: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return read_embedding_csv(ss.str());
}

}  // namespace gdrec::embed
