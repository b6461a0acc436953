#include "gdrec/seqio.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace gdrec::seqio {

bool is_residue(char c) {
    switch (c) {
        case 'A': case 'C': case 'G': case 'T': case 'N': case '-':
            return true;
        default:
            return false;
    }
}

void TrimParams::validate() const {
    if (!(min_conserved_fraction > 0.0 &&
          min_conserved_fraction <= min_flank_fraction &&
          min_flank_fraction <= 1.0))
        throw ConfigError("trim params: need 0 < min_conserved_fraction <= "
                          "min_flank_fraction <= 1");
    if (max_contiguous_nonconserved < 1 || min_block_length < 1)
        throw ConfigError("trim params: integer thresholds must be >= 1");
}

AlignedSet parse_fasta(const std::string& text) {
    AlignedSet out;
    std::unordered_set<std::string> seen;
    std::string label;
    std::string seq;
    std::size_t lineno = 0;

    auto flush = [&]() {
        if (label.empty() && seq.empty()) return;
        if (label.empty()) throw IoError("fasta: sequence data before first header");
        if (seen.count(label))
            throw DuplicateLabelError("fasta: duplicate label '" + label + "'");
        seen.insert(label);
        out.labels.push_back(label);
        out.sequences.push_back(seq);
        label.clear();
        seq.clear();
    };

    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '>') {
            flush();
            label = line.substr(1);
            // strip surrounding whitespace from the header
            auto b = label.find_first_not_of(" \t");
            auto e = label.find_last_not_of(" \t");
            label = (b == std::string::npos) ? "" : label.substr(b, e - b + 1);
            if (label.empty())
                throw IoError("fasta: empty label at line " + std::to_string(lineno));
        } else {
            for (std::size_t i = 0; i < line.size(); ++i) {
                char c = static_cast<char>(std::toupper(static_cast<unsigned char>(line[i])));
                if (c == 'U') c = 'T';
                if (c == ' ' || c == '\t') continue;
                if (!is_residue(c))
                    throw ResidueError("fasta: illegal residue '" + std::string(1, line[i]) +
                                       "' at line " + std::to_string(lineno) +
                                       ", column " + std::to_string(i + 1));
                seq.push_back(c);
            }
        }
    }
    flush();

    if (out.labels.empty()) throw IoError("fasta: no records");
    out.length = out.sequences.front().size();
    for (std::size_t i = 0; i < out.sequences.size(); ++i) {
        if (out.sequences[i].size() != out.length)
            throw AlignmentLengthError(
                "fasta: sequence '" + out.labels[i] + "' has length " +
                std::to_string(out.sequences[i].size()) + ", expected " +
                std::to_string(out.length));
    }
    return out;
}

AlignedSet read_fasta_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open fasta file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_fasta(ss.str());
}

std::string write_fasta(const AlignedSet& aln) {
    std::ostringstream out;
    for (std::size_t i = 0; i < aln.size(); ++i) {
        out << '>' << aln.labels[i] << '\n';
        const std::string& s = aln.sequences[i];
        for (std::size_t p = 0; p < s.size(); p += 70)
            out << s.substr(p, 70) << '\n';
    }
    return out.str();
}

void write_fasta_file(const AlignedSet& aln, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write fasta file: " + path);
    out << write_fasta(aln);
}

namespace {

enum class ColumnClass { GapBlocked, NonConserved, Conserved, HighlyConserved };

// 'N' counts as a non-gap residue but never as the majority candidate.
ColumnClass classify_column(const AlignedSet& aln, std::size_t col,
                            const TrimParams& p) {
    std::array<int, 4> counts{};  // A C G T
    int gaps = 0;
    for (const std::string& s : aln.sequences) {
        switch (s[col]) {
            case 'A': ++counts[0]; break;
            case 'C': ++counts[1]; break;
            case 'G': ++counts[2]; break;
            case 'T': ++counts[3]; break;
            case '-': ++gaps; break;
            default: break;  // 'N'
        }
    }
    if (!p.allow_gaps && gaps > 0) return ColumnClass::GapBlocked;
    int majority = *std::max_element(counts.begin(), counts.end());
    double n = static_cast<double>(aln.size());
    if (majority > p.min_conserved_fraction * n) {
        return (majority >= p.min_flank_fraction * n) ? ColumnClass::HighlyConserved
                                                      : ColumnClass::Conserved;
    }
    return ColumnClass::NonConserved;
}

}  // namespace

std::pair<AlignedSet, TrimReport> trim_conserved_blocks(const AlignedSet& aln,
                                                        const TrimParams& params) {
    params.validate();
    if (aln.size() < 2) throw DataError("trim: need at least 2 sequences");

    std::vector<ColumnClass> cls(aln.length);
    for (std::size_t c = 0; c < aln.length; ++c)
        cls[c] = classify_column(aln, c, params);

    // Segments are maximal runs free of gap-blocked columns. Within a
    // segment, cut at non-conserved stretches longer than the threshold,
    // trim each piece to highly conserved flanks, then apply the minimum
    // block length.
    std::vector<std::pair<std::size_t, std::size_t>> blocks;
    std::size_t c = 0;
    while (c < aln.length) {
        if (cls[c] == ColumnClass::GapBlocked) { ++c; continue; }
        std::size_t seg_end = c;
        while (seg_end < aln.length && cls[seg_end] != ColumnClass::GapBlocked)
            ++seg_end;

        std::size_t piece_start = c;
        std::size_t p = c;
        auto flush_piece = [&](std::size_t piece_end) {
            std::size_t lo = piece_start, hi = piece_end;  // [lo, hi)
            while (lo < hi && cls[lo] != ColumnClass::HighlyConserved) ++lo;
            while (hi > lo && cls[hi - 1] != ColumnClass::HighlyConserved) --hi;
            if (hi - lo >= static_cast<std::size_t>(params.min_block_length))
                blocks.emplace_back(lo, hi);
        };
        while (p < seg_end) {
            if (cls[p] == ColumnClass::NonConserved) {
                std::size_t run_end = p;
                while (run_end < seg_end && cls[run_end] == ColumnClass::NonConserved)
                    ++run_end;
                if (run_end - p > static_cast<std::size_t>(params.max_contiguous_nonconserved)) {
                    flush_piece(p);
                    piece_start = run_end;
                }
                p = run_end;
            } else {
                ++p;
            }
        }
        flush_piece(seg_end);
        c = seg_end;
    }

    if (blocks.empty()) throw EmptyTrimError("trim: no columns survive");

    AlignedSet out;
    out.labels = aln.labels;
    out.sequences.resize(aln.size());
    std::size_t kept = 0;
    for (const auto& [lo, hi] : blocks) {
        kept += hi - lo;
        for (std::size_t i = 0; i < aln.size(); ++i)
            out.sequences[i].append(aln.sequences[i], lo, hi - lo);
    }
    out.length = kept;

    TrimReport report;
    report.kept_spans = blocks;
    report.kept_fraction = static_cast<double>(kept) / static_cast<double>(aln.length);
    report.params_used = params;
    return {std::move(out), std::move(report)};
}

}  // namespace gdrec::seqio
