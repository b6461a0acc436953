// Aligned DNA sequence sets: FASTA parsing/writing and conserved-block
// trimming over the alphabet {A,C,G,T,N,-}.
#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "gdrec/common.hpp"

namespace gdrec::seqio {

struct AlignedSet {
    std::vector<std::string> labels;     // unique, insertion order
    std::vector<std::string> sequences;  // equal length, upper-case
    std::size_t length = 0;              // column count

    std::size_t size() const { return labels.size(); }
    bool operator==(const AlignedSet&) const = default;
};

struct TrimParams {
    double min_conserved_fraction = 0.5;   // majority residue share, strict >
    double min_flank_fraction = 0.85;      // "highly conserved", >=
    int max_contiguous_nonconserved = 8;
    int min_block_length = 10;
    bool allow_gaps = false;

    void validate() const;
};

struct TrimReport {
    std::vector<std::pair<std::size_t, std::size_t>> kept_spans;  // [start,end)
    double kept_fraction = 0.0;
    TrimParams params_used;
};

bool is_residue(char c);

// FASTA in/out. Parsing upper-cases residues and normalizes 'U' to 'T'.
AlignedSet parse_fasta(const std::string& text);
AlignedSet read_fasta_file(const std::string& path);
std::string write_fasta(const AlignedSet& aln);  // 70-column wrapped
void write_fasta_file(const AlignedSet& aln, const std::string& path);

// Keeps the union of conserved blocks (Gblocks-style simplified rule).
std::pair<AlignedSet, TrimReport> trim_conserved_blocks(const AlignedSet& aln,
                                                        const TrimParams& params);

}  // namespace gdrec::seqio
