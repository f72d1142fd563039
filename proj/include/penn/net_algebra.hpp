#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "penn/mlp.hpp"

namespace penn {

/// Observation pattern as a bitmask: bit j-1 holds coordinate j.
using Pattern = std::uint32_t;

Vector pattern_to_vector(Pattern p, int d);
std::string pattern_to_string(Pattern p, int d);
Pattern pattern_from_string(const std::string& s);

/// A partition {S_1, ..., S_K} of an explicit pattern set S in {0,1}^d,
/// optionally with per-cell probabilities pi_k.
struct PatternPartition {
    int d = 0;
    std::vector<std::vector<Pattern>> cells;
    std::vector<double> probabilities;  // empty or one entry per cell

    std::size_t cell_count() const { return cells.size(); }
    std::vector<Pattern> all_patterns() const;

    /// Checks disjointness, nonemptiness and probability normalisation;
    /// throws naming the offending pattern or cell.
    void validate() const;

    /// 0-based cell index containing p, or -1.
    int cell_of(Pattern p) const;
};

/// A separating network with anchors v_1..v_K and margin epsilon:
/// ||f(omega) - v_k||_inf <= eps/2 on cell k and ||v_k - v_k'||_inf >= 2 eps
/// across cells.
struct SeparationCertificate {
    Mlp network;
    std::vector<Vector> anchors;
    double margin = 0.0;
};

/// Exhaustive Definition-style check of a certificate over the partition's
/// pattern set. Returns false and fills `why` on the first violation.
bool verify_certificate(const SeparationCertificate& cert, const PatternPartition& partition,
                        std::string* why = nullptr);

/// Merges f2 after f1 into a single network of depth L1 + L2 that is
/// pointwise equal to f2 o f1. The junction affine maps are multiplied out.
Mlp compose(const Mlp& f1, const Mlp& f2);

/// Appends identity blocks so the result has the target depth and is
/// pointwise equal to f. The first appended layer splits the output into
/// (sigma(y), sigma(-y)); later layers pass the nonnegative pair through, and
/// the final affine recombines, so the nonzero count stays within
/// 2s + 2 p_out (L2 - L1).
Mlp pad(const Mlp& f, int target_depth);

/// Stacks networks of equal depth and input width block-diagonally; the
/// output is the concatenation of the individual outputs.
Mlp parallelize(const std::vector<Mlp>& nets);

/// Embeds f into a wider architecture of the same depth by zero-filling.
/// Input and output widths must match; hidden widths must dominate.
Mlp enlarge(const Mlp& f, const Architecture& bigger);

/// One-dimensional gate equal to 1 on [a - eps/2, a + eps/2], 0 outside
/// [a - eps, a + eps] and linear in between, realized with 4 ReLU units.
Mlp bump_gate(double a, double eps);

/// Certificate for a partition induced by the coordinates in J (1-based):
/// the network encodes omega_J as an integer and interpolates cell values
/// k/K, giving margin 1/(2K). Requires d <= 20 and that patterns agreeing
/// on J share a cell.
SeparationCertificate separate_by_coordinates(const PatternPartition& partition,
                                              const std::vector<int>& coords);

struct Halfspace {
    Vector v;
    double b = 0.0;
};

/// Certificate for a partition whose cells are halfspace intersections:
/// ramp gates phi_(k,l) feed an AND layer so the network outputs exactly k
/// on cell k. Requires each cell to equal the intersection of its
/// halfspaces with S, with a strictly positive violation margin.
SeparationCertificate separate_by_halfspaces(const PatternPartition& partition,
                                             const std::vector<std::vector<Halfspace>>& halfspaces);

}  // namespace penn
