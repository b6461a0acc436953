#include "gdrec/gendist.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace gdrec::gendist {

ModelTag model_from_string(const std::string& name) {
    if (name == "P_DIST") return ModelTag::P_DIST;
    if (name == "JC69") return ModelTag::JC69;
    if (name == "K2P") return ModelTag::K2P;
    if (name == "TN93_MCL") return ModelTag::TN93_MCL;
    throw ConfigError("unknown substitution model: " + name);
}

std::string model_name(ModelTag model) {
    switch (model) {
        case ModelTag::P_DIST: return "P_DIST";
        case ModelTag::JC69: return "JC69";
        case ModelTag::K2P: return "K2P";
        case ModelTag::TN93_MCL: return "TN93_MCL";
    }
    return "?";
}

PairCounts& PairCounts::operator+=(const PairCounts& o) {
    compared_sites += o.compared_sites;
    transitions_AG += o.transitions_AG;
    transitions_CT += o.transitions_CT;
    transversions += o.transversions;
    for (int i = 0; i < 4; ++i) base_counts[i] += o.base_counts[i];
    return *this;
}

PooledParams PooledParams::from_counts(const PairCounts& total) {
    double sum = 0.0;
    for (long c : total.base_counts) sum += static_cast<double>(c);
    if (sum <= 0.0) throw NoComparableSitesError("pooled params: no counted bases");
    PooledParams p;
    for (int i = 0; i < 4; ++i)
        p.pi[i] = static_cast<double>(total.base_counts[i]) / sum;
    return p;
}

void DistanceMatrix::validate() const {
    const std::size_t n = size();
    if (values.size() != n * n) throw ShapeError("distance matrix: bad value count");
    for (std::size_t i = 0; i < n; ++i) {
        if (at(i, i) != 0.0)
            throw NumericalError("distance matrix: nonzero diagonal at " + labels[i]);
        for (std::size_t j = 0; j < n; ++j) {
            double v = at(i, j);
            if (!std::isfinite(v) || v < 0.0)
                throw NumericalError("distance matrix: invalid entry");
            if (at(j, i) != v)
                throw NumericalError("distance matrix: not symmetric");
        }
    }
}

namespace {

inline int base_index(char c) {
    switch (c) {
        case 'A': return 0;
        case 'C': return 1;
        case 'G': return 2;
        case 'T': return 3;
        default: return -1;  // N or gap
    }
}

}  // namespace

PairCounts pair_counts(const std::string& a, const std::string& b,
                       Deletion deletion, const std::vector<bool>* mask) {
    if (a.size() != b.size())
        throw AlignmentLengthError("pair_counts: sequences differ in length");
    if (deletion == Deletion::CompleteMask) {
        if (mask == nullptr || mask->size() != a.size())
            throw ConfigError("pair_counts: complete deletion requires a column mask");
    }
    PairCounts pc;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (deletion == Deletion::CompleteMask && !(*mask)[i]) continue;
        int x = base_index(a[i]);
        int y = base_index(b[i]);
        if (x < 0 || y < 0) continue;  // pairwise deletion of N / gap sites
        ++pc.compared_sites;
        ++pc.base_counts[x];
        ++pc.base_counts[y];
        if (x == y) continue;
        bool ag = (x == 0 && y == 2) || (x == 2 && y == 0);
        bool ct = (x == 1 && y == 3) || (x == 3 && y == 1);
        if (ag) ++pc.transitions_AG;
        else if (ct) ++pc.transitions_CT;
        else ++pc.transversions;
    }
    if (pc.compared_sites == 0)
        throw NoComparableSitesError("pair_counts: no comparable sites");
    return pc;
}

std::vector<bool> complete_deletion_mask(const seqio::AlignedSet& aln) {
    std::vector<bool> mask(aln.length, true);
    for (const std::string& s : aln.sequences)
        for (std::size_t c = 0; c < aln.length; ++c)
            if (s[c] == '-' || s[c] == 'N') mask[c] = false;
    return mask;
}

namespace {

double safe_log_arg(double x, const char* what) {
    if (x <= 0.0)
        throw SaturationError(std::string("distance undefined: ") + what +
                              " log argument <= 0 at observed divergence");
    return x;
}

double tn93_distance(const PairCounts& c, const PooledParams& pooled) {
    const double n = static_cast<double>(c.compared_sites);
    const double p1 = static_cast<double>(c.transitions_AG) / n;
    const double p2 = static_cast<double>(c.transitions_CT) / n;
    const double q = static_cast<double>(c.transversions) / n;
    const double piA = pooled.pi[0], piC = pooled.pi[1];
    const double piG = pooled.pi[2], piT = pooled.pi[3];
    const double piR = piA + piG, piY = piC + piT;
    if (piA <= 0 || piC <= 0 || piG <= 0 || piT <= 0)
        throw SaturationError("TN93: zero pooled base frequency");
    const double k1 = 2.0 * piA * piG / piR;
    const double k2 = 2.0 * piT * piC / piY;
    const double k3 = 2.0 * (piR * piY - piA * piG * piY / piR - piT * piC * piR / piY);
    const double w1 = safe_log_arg(1.0 - p1 / k1 - q / (2.0 * piR), "TN93 purine");
    const double w2 = safe_log_arg(1.0 - p2 / k2 - q / (2.0 * piY), "TN93 pyrimidine");
    const double w3 = safe_log_arg(1.0 - q / (2.0 * piR * piY), "TN93 transversion");
    return -k1 * std::log(w1) - k2 * std::log(w2) - k3 * std::log(w3);
}

}  // namespace

double pairwise_distance(const PairCounts& counts, ModelTag model,
                         const std::optional<PooledParams>& pooled) {
    if (counts.compared_sites < 1)
        throw NoComparableSitesError("pairwise_distance: compared_sites = 0");
    const double n = static_cast<double>(counts.compared_sites);
    const double diffs = static_cast<double>(counts.transitions_AG +
                                             counts.transitions_CT +
                                             counts.transversions);
    switch (model) {
        case ModelTag::P_DIST:
            return diffs / n;
        case ModelTag::JC69: {
            const double p = diffs / n;
            return -0.75 * std::log(safe_log_arg(1.0 - 4.0 / 3.0 * p, "JC69"));
        }
        case ModelTag::K2P: {
            const double P = static_cast<double>(counts.transitions_AG +
                                                 counts.transitions_CT) / n;
            const double Q = static_cast<double>(counts.transversions) / n;
            return -0.5 * std::log(safe_log_arg(1.0 - 2.0 * P - Q, "K2P transition")) -
                   0.25 * std::log(safe_log_arg(1.0 - 2.0 * Q, "K2P transversion"));
        }
        case ModelTag::TN93_MCL: {
            if (!pooled)
                throw ConfigError("TN93_MCL requires pooled base frequencies");
            return tn93_distance(counts, *pooled);
        }
    }
    throw ConfigError("unknown model");
}

namespace {

struct PairTable {
    std::vector<PairCounts> counts;  // one per i<j in row-major pair order
    PairCounts total;
};

PairTable all_pair_counts(const seqio::AlignedSet& aln, Deletion deletion) {
    const std::size_t n = aln.size();
    std::vector<bool> mask;
    const std::vector<bool>* mask_ptr = nullptr;
    if (deletion == Deletion::CompleteMask) {
        mask = complete_deletion_mask(aln);
        mask_ptr = &mask;
    }
    PairTable t;
    t.counts.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            t.counts.push_back(pair_counts(aln.sequences[i], aln.sequences[j],
                                           deletion, mask_ptr));
    for (const PairCounts& pc : t.counts) t.total += pc;
    return t;
}

DistanceMatrix matrix_from_pairs(const seqio::AlignedSet& aln, ModelTag model,
                                 const PairTable& table, Exec exec) {
    const std::size_t n = aln.size();
    DistanceMatrix dm;
    dm.labels = aln.labels;
    dm.model = model;
    dm.values.assign(n * n, 0.0);

    std::optional<PooledParams> pooled;
    if (model == ModelTag::TN93_MCL)
        pooled = PooledParams::from_counts(table.total);

    const long npairs = static_cast<long>(table.counts.size());
    std::vector<std::string> failures(npairs);
    parallel_for(npairs, exec, [&](long k) {
        // invert flattened pair index
        std::size_t i = 0, acc = 0;
        while (acc + (n - 1 - i) <= static_cast<std::size_t>(k)) {
            acc += n - 1 - i;
            ++i;
        }
        std::size_t j = i + 1 + (static_cast<std::size_t>(k) - acc);
        try {
            double d = pairwise_distance(table.counts[k], model, pooled);
            dm.at(i, j) = d;
            dm.at(j, i) = d;
        } catch (const Error& e) {
            failures[k] = dm.labels[i] + " vs " + dm.labels[j] + ": " + e.what();
        }
    });
    for (const std::string& f : failures)
        if (!f.empty()) throw SaturationError(f);
    return dm;
}

}  // namespace

DistanceMatrix distance_matrix(const seqio::AlignedSet& aln, ModelTag model,
                               Deletion deletion, Exec exec) {
    if (aln.size() < 2) throw DataError("distance_matrix: need at least 2 sequences");
    PairTable table = all_pair_counts(aln, deletion);
    return matrix_from_pairs(aln, model, table, exec);
}

namespace {

seqio::AlignedSet resample_columns(const seqio::AlignedSet& aln, Rng& rng) {
    seqio::AlignedSet out;
    out.labels = aln.labels;
    out.length = aln.length;
    std::vector<std::size_t> cols(aln.length);
    for (std::size_t c = 0; c < aln.length; ++c)
        cols[c] = rng.below(aln.length);
    out.sequences.resize(aln.size());
    for (std::size_t i = 0; i < aln.size(); ++i) {
        out.sequences[i].resize(aln.length);
        for (std::size_t c = 0; c < aln.length; ++c)
            out.sequences[i][c] = aln.sequences[i][cols[c]];
    }
    return out;
}

double percentile_linear(std::vector<double> v, double q) {
    // type-7 linear interpolation on sorted values
    std::sort(v.begin(), v.end());
    if (v.size() == 1) return v[0];
    double pos = q * static_cast<double>(v.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= v.size()) return v.back();
    double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[lo + 1] * frac;
}

}  // namespace

DistanceMatrix bootstrap_se(const seqio::AlignedSet& aln, ModelTag model,
                            int B, std::uint64_t seed, Deletion deletion,
                            Exec exec) {
    if (B < 2) throw ConfigError("bootstrap_se: B must be >= 2");
    DistanceMatrix dm = distance_matrix(aln, model, deletion, Exec::Serial);
    const std::size_t n = aln.size();

    // replicate -> full matrix of distances (NaN marks a skipped pair)
    std::vector<std::vector<double>> reps(static_cast<std::size_t>(B));
    parallel_for(B, exec, [&](long b) {
        Rng rng(Rng::child(seed, static_cast<std::uint64_t>(b)));
        seqio::AlignedSet res = resample_columns(aln, rng);
        std::vector<double> vals(n * n, std::numeric_limits<double>::quiet_NaN());
        std::optional<PooledParams> pooled;
        // pooled frequencies recomputed per replicate
        PairCounts total;
        std::vector<PairCounts> counts;
        counts.reserve(n * (n - 1) / 2);
        std::vector<bool> mask;
        const std::vector<bool>* mask_ptr = nullptr;
        if (deletion == Deletion::CompleteMask) {
            mask = complete_deletion_mask(res);
            mask_ptr = &mask;
        }
        std::vector<std::pair<std::size_t, std::size_t>> idx;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                idx.emplace_back(i, j);
                try {
                    counts.push_back(pair_counts(res.sequences[i], res.sequences[j],
                                                 deletion, mask_ptr));
                    total += counts.back();
                } catch (const NoComparableSitesError&) {
                    counts.push_back(PairCounts{});  // compared_sites == 0 marks skip
                }
            }
        if (model == ModelTag::TN93_MCL && total.compared_sites > 0)
            pooled = PooledParams::from_counts(total);
        for (std::size_t k = 0; k < counts.size(); ++k) {
            if (counts[k].compared_sites == 0) continue;
            try {
                double d = pairwise_distance(counts[k], model, pooled);
                vals[idx[k].first * n + idx[k].second] = d;
            } catch (const Error&) {
                // saturated replicate, skipped for this pair
            }
        }
        reps[static_cast<std::size_t>(b)] = std::move(vals);
    });

    dm.stderr_values.assign(n * n, 0.0);
    dm.ci_lower.assign(n * n, 0.0);
    dm.ci_upper.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            std::vector<double> vals;
            vals.reserve(static_cast<std::size_t>(B));
            for (int b = 0; b < B; ++b) {
                double v = reps[static_cast<std::size_t>(b)][i * n + j];
                if (std::isfinite(v)) vals.push_back(v);
            }
            int skips = B - static_cast<int>(vals.size());
            if (skips > B / 2)
                throw BootstrapDegenerateError(
                    "bootstrap: " + std::to_string(skips) + "/" + std::to_string(B) +
                    " replicates skipped for pair " + dm.labels[i] + " vs " +
                    dm.labels[j]);
            double mean = 0.0;
            for (double v : vals) mean += v;
            mean /= static_cast<double>(vals.size());
            double ss = 0.0;
            for (double v : vals) ss += (v - mean) * (v - mean);
            double se = vals.size() > 1
                            ? std::sqrt(ss / static_cast<double>(vals.size() - 1))
                            : 0.0;
            double lo = percentile_linear(vals, 0.025);
            double hi = percentile_linear(vals, 0.975);
            dm.stderr_values[i * n + j] = dm.stderr_values[j * n + i] = se;
            dm.ci_lower[i * n + j] = dm.ci_lower[j * n + i] = lo;
            dm.ci_upper[i * n + j] = dm.ci_upper[j * n + i] = hi;
        }
    }
    return dm;
}

std::string write_csv(const DistanceMatrix& dm) {
    std::ostringstream out;
    out.precision(17);
    const std::size_t n = dm.size();
    out << "label";
    for (const std::string& l : dm.labels) out << ',' << l;
    out << '\n';
    for (std::size_t i = 0; i < n; ++i) {
        out << dm.labels[i];
        for (std::size_t j = 0; j < n; ++j) out << ',' << dm.at(i, j);
        out << '\n';
    }
    return out.str();
}

void write_csv_file(const DistanceMatrix& dm, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write csv: " + path);
    out << write_csv(dm);
}

DistanceMatrix read_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw IoError("distance csv: empty input");
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
    if (header.size() < 2) throw IoError("distance csv: bad header");
    DistanceMatrix dm;
    dm.labels.assign(header.begin() + 1, header.end());
    const std::size_t n = dm.labels.size();
    dm.values.assign(n * n, 0.0);

    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (row >= n) throw IoError("distance csv: too many rows");
        std::vector<std::string> cells = split(line);
        if (cells.size() != n + 1)
            throw IoError("distance csv: row " + std::to_string(row + 1) +
                          " has " + std::to_string(cells.size() - 1) + " values");
        if (cells[0] != dm.labels[row])
            throw IoError("distance csv: row label '" + cells[0] +
                          "' does not match header order");
        for (std::size_t j = 0; j < n; ++j) {
            try {
                dm.values[row * n + j] = std::stod(cells[j + 1]);
            } catch (const std::exception&) {
                throw IoError("distance csv: bad number '" + cells[j + 1] + "'");
            }
        }
        ++row;
    }
    if (row != n) throw IoError("distance csv: expected " + std::to_string(n) + " rows");

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (std::abs(dm.at(i, j) - dm.at(j, i)) > 1e-12)
                throw ReadSymmetryError("distance csv: triangles disagree at " +
                                        dm.labels[i] + " vs " + dm.labels[j]);
            dm.at(j, i) = dm.at(i, j);  // upper triangle wins within tolerance
        }
    }
    return dm;
}

DistanceMatrix read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open csv: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return read_csv(ss.str());
}

}  // namespace gdrec::gendist
