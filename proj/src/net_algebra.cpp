#include "penn/net_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace penn {

namespace {

constexpr int kEnumerationGuard = 20;

void check_enumerable(const PatternPartition& partition) {
    if (partition.d > kEnumerationGuard) {
        throw std::invalid_argument("partition: d = " + std::to_string(partition.d) +
                                    " exceeds the exhaustive-enumeration guard d <= " +
                                    std::to_string(kEnumerationGuard));
    }
}

}  // namespace

Vector pattern_to_vector(Pattern p, int d) {
    Vector v(d, 0.0);
    for (int j = 0; j < d; ++j) v[j] = (p >> j) & 1u ? 1.0 : 0.0;
    return v;
}

std::string pattern_to_string(Pattern p, int d) {
    std::string s(d, '0');
    for (int j = 0; j < d; ++j) {
        if ((p >> j) & 1u) s[j] = '1';
    }
    return s;
}

Pattern pattern_from_string(const std::string& s) {
    if (s.empty() || s.size() > 31) throw std::invalid_argument("pattern: bad length");
    Pattern p = 0;
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (s[j] == '1') {
            p |= Pattern{1} << j;
        } else if (s[j] != '0') {
            throw std::invalid_argument("pattern: invalid character in '" + s + "'");
        }
    }
    return p;
}

std::vector<Pattern> PatternPartition::all_patterns() const {
    std::vector<Pattern> all;
    for (const auto& cell : cells) all.insert(all.end(), cell.begin(), cell.end());
    return all;
}

void PatternPartition::validate() const {
    if (d < 1 || d > 31) throw std::invalid_argument("partition: d must be in [1, 31]");
    if (cells.empty()) throw std::invalid_argument("partition: no cells");
    std::map<Pattern, std::size_t> seen;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        if (cells[k].empty()) {
            throw std::invalid_argument("partition: cell " + std::to_string(k + 1) + " is empty");
        }
        for (Pattern p : cells[k]) {
            if (d < 31 && p >= (Pattern{1} << d)) {
                throw std::invalid_argument("partition: pattern " + std::to_string(p) +
                                            " out of range for d = " + std::to_string(d));
            }
            auto [it, fresh] = seen.emplace(p, k);
            if (!fresh) {
                throw std::invalid_argument(
                    "partition: pattern " + pattern_to_string(p, d) + " appears in cells " +
                    std::to_string(it->second + 1) + " and " + std::to_string(k + 1));
            }
        }
    }
    if (!probabilities.empty()) {
        if (probabilities.size() != cells.size()) {
            throw std::invalid_argument("partition: probability count must match cell count");
        }
        double total = 0.0;
        for (double p : probabilities) {
            if (p < 0.0) throw std::invalid_argument("partition: negative cell probability");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            throw std::invalid_argument("partition: cell probabilities sum to " +
                                        std::to_string(total));
        }
    }
}

int PatternPartition::cell_of(Pattern p) const {
    for (std::size_t k = 0; k < cells.size(); ++k) {
        if (std::find(cells[k].begin(), cells[k].end(), p) != cells[k].end()) {
            return static_cast<int>(k);
        }
    }
    return -1;
}

bool verify_certificate(const SeparationCertificate& cert, const PatternPartition& partition,
                        std::string* why) {
    // Slack for the double rounding of anchor arithmetic; far below any
    // margin reachable at d <= 20.
    constexpr double kSlack = 1e-12;
    const double eps = cert.margin;
    if (!(eps > 0.0)) {
        if (why) *why = "margin must be positive";
        return false;
    }
    if (cert.anchors.size() != partition.cell_count()) {
        if (why) *why = "anchor count does not match cell count";
        return false;
    }
    for (std::size_t k = 0; k < partition.cells.size(); ++k) {
        for (Pattern p : partition.cells[k]) {
            Vector out = forward(cert.network, pattern_to_vector(p, partition.d));
            if (out.size() != cert.anchors[k].size()) {
                if (why) *why = "network output width does not match anchor dimension";
                return false;
            }
            double dist = 0.0;
            for (std::size_t i = 0; i < out.size(); ++i) {
                dist = std::max(dist, std::abs(out[i] - cert.anchors[k][i]));
            }
            if (dist > eps / 2.0 + kSlack) {
                if (why) {
                    *why = "pattern " + pattern_to_string(p, partition.d) + " in cell " +
                           std::to_string(k + 1) + " lies " + std::to_string(dist) +
                           " from its anchor (allowed " + std::to_string(eps / 2.0) + ")";
                }
                return false;
            }
        }
    }
    for (std::size_t k = 0; k < cert.anchors.size(); ++k) {
        for (std::size_t k2 = k + 1; k2 < cert.anchors.size(); ++k2) {
            double dist = 0.0;
            for (std::size_t i = 0; i < cert.anchors[k].size(); ++i) {
                dist = std::max(dist, std::abs(cert.anchors[k][i] - cert.anchors[k2][i]));
            }
            if (dist < 2.0 * eps - kSlack) {
                if (why) {
                    *why = "anchors " + std::to_string(k + 1) + " and " + std::to_string(k2 + 1) +
                           " are only " + std::to_string(dist) + " apart (need " +
                           std::to_string(2.0 * eps) + ")";
                }
                return false;
            }
        }
    }
    return true;
}

Mlp compose(const Mlp& f1, const Mlp& f2) {
    if (f1.arch.output_dim() != f2.arch.input_dim()) {
        throw std::invalid_argument("compose: f1 output width " +
                                    std::to_string(f1.arch.output_dim()) +
                                    " != f2 input width " + std::to_string(f2.arch.input_dim()));
    }
    const int l1 = f1.arch.depth, l2 = f2.arch.depth;
    std::vector<int> widths;
    for (int i = 0; i <= l1; ++i) widths.push_back(f1.arch.widths[i]);
    for (int i = 1; i <= l2 + 1; ++i) widths.push_back(f2.arch.widths[i]);

    Mlp out = Mlp::zeros(Architecture(l1 + l2, widths));
    for (int l = 0; l < l1; ++l) {
        out.weights[l] = f1.weights[l];
        out.biases[l] = f1.biases[l];
    }
    // junction: A_1^(2) o A_{L1+1}^(1) merged into one affine map
    {
        const Matrix& wa = f1.weights[l1];
        const Vector& ba = f1.biases[l1];
        const Matrix& wb = f2.weights[0];
        const Vector& bb = f2.biases[0];
        Matrix merged(wb.rows, wa.cols);
        for (std::size_t i = 0; i < wb.rows; ++i) {
            for (std::size_t k = 0; k < wb.cols; ++k) {
                const double v = wb(i, k);
                if (v == 0.0) continue;
                for (std::size_t j = 0; j < wa.cols; ++j) merged(i, j) += v * wa(k, j);
            }
        }
        Vector merged_bias(bb);
        for (std::size_t i = 0; i < wb.rows; ++i) {
            for (std::size_t k = 0; k < wb.cols; ++k) merged_bias[i] += wb(i, k) * ba[k];
        }
        out.weights[l1] = std::move(merged);
        out.biases[l1] = std::move(merged_bias);
    }
    for (int l = 1; l <= l2; ++l) {
        out.weights[l1 + l] = f2.weights[l];
        out.biases[l1 + l] = f2.biases[l];
    }
    return out;
}

Mlp pad(const Mlp& f, int target_depth) {
    const int l1 = f.arch.depth;
    if (target_depth < l1) {
        throw std::invalid_argument("pad: target depth " + std::to_string(target_depth) +
                                    " below current depth " + std::to_string(l1));
    }
    if (target_depth == l1) {
        Mlp copy = f;
        copy.mask.reset();
        return copy;
    }
    const int extra = target_depth - l1;
    const int p_out = f.arch.output_dim();

    std::vector<int> widths(f.arch.widths.begin(), f.arch.widths.end() - 1);
    for (int i = 0; i < extra; ++i) widths.push_back(2 * p_out);
    widths.push_back(p_out);

    Mlp out = Mlp::zeros(Architecture(target_depth, widths));
    for (int l = 0; l < l1; ++l) {
        out.weights[l] = f.weights[l];
        out.biases[l] = f.biases[l];
    }
    // split layer: y -> (y, -y) stacked on top of the old output affine
    {
        const Matrix& wa = f.weights[l1];
        const Vector& ba = f.biases[l1];
        Matrix split(2 * p_out, wa.cols);
        Vector split_bias(2 * p_out, 0.0);
        for (int j = 0; j < p_out; ++j) {
            for (std::size_t k = 0; k < wa.cols; ++k) {
                split(j, k) = wa(j, k);
                split(j + p_out, k) = -wa(j, k);
            }
            split_bias[j] = ba[j];
            split_bias[j + p_out] = -ba[j];
        }
        out.weights[l1] = std::move(split);
        out.biases[l1] = std::move(split_bias);
    }
    // pass-through layers: the pair is nonnegative after the ReLU, so the
    // identity map carries it unchanged
    for (int e = 1; e < extra; ++e) {
        Matrix& w = out.weights[l1 + e];
        for (int j = 0; j < 2 * p_out; ++j) w(j, j) = 1.0;
    }
    // recombine: y = sigma(y) - sigma(-y)
    {
        Matrix& w = out.weights[l1 + extra];
        for (int j = 0; j < p_out; ++j) {
            w(j, j) = 1.0;
            w(j, j + p_out) = -1.0;
        }
    }
    return out;
}

Mlp parallelize(const std::vector<Mlp>& nets) {
    if (nets.empty()) throw std::invalid_argument("parallelize: empty list");
    const int depth = nets[0].arch.depth;
    const int d = nets[0].arch.input_dim();
    for (std::size_t i = 1; i < nets.size(); ++i) {
        if (nets[i].arch.depth != depth) {
            throw std::invalid_argument("parallelize: depth mismatch at network " +
                                        std::to_string(i + 1) + " (pad first)");
        }
        if (nets[i].arch.input_dim() != d) {
            throw std::invalid_argument("parallelize: input width mismatch at network " +
                                        std::to_string(i + 1));
        }
    }
    std::vector<int> widths{d};
    for (int l = 1; l <= depth + 1; ++l) {
        int total = 0;
        for (const auto& net : nets) total += net.arch.widths[l];
        widths.push_back(total);
    }
    Mlp out = Mlp::zeros(Architecture(depth, widths));
    for (int l = 0; l <= depth; ++l) {
        std::size_t row0 = 0, col0 = 0;
        for (const auto& net : nets) {
            const Matrix& w = net.weights[l];
            // all networks read the shared input at the first layer
            const std::size_t c0 = l == 0 ? 0 : col0;
            for (std::size_t i = 0; i < w.rows; ++i) {
                for (std::size_t j = 0; j < w.cols; ++j) {
                    out.weights[l](row0 + i, c0 + j) = w(i, j);
                }
                out.biases[l][row0 + i] = net.biases[l][i];
            }
            row0 += w.rows;
            if (l > 0) col0 += w.cols;
        }
    }
    return out;
}

Mlp enlarge(const Mlp& f, const Architecture& bigger) {
    if (bigger.depth != f.arch.depth) {
        throw std::invalid_argument("enlarge: depth mismatch");
    }
    if (bigger.input_dim() != f.arch.input_dim() || bigger.output_dim() != f.arch.output_dim()) {
        throw std::invalid_argument("enlarge: input/output widths must match for pointwise equality");
    }
    for (std::size_t i = 0; i < bigger.widths.size(); ++i) {
        if (bigger.widths[i] < f.arch.widths[i]) {
            throw std::invalid_argument("enlarge: width " + std::to_string(bigger.widths[i]) +
                                        " at position " + std::to_string(i) +
                                        " does not dominate " + std::to_string(f.arch.widths[i]));
        }
    }
    Mlp out = Mlp::zeros(bigger);
    for (int l = 0; l <= f.arch.depth; ++l) {
        for (std::size_t i = 0; i < f.weights[l].rows; ++i) {
            for (std::size_t j = 0; j < f.weights[l].cols; ++j) {
                out.weights[l](i, j) = f.weights[l](i, j);
            }
            out.biases[l][i] = f.biases[l][i];
        }
    }
    return out;
}

Mlp bump_gate(double a, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("bump_gate: eps must be positive");
    Mlp net = Mlp::zeros(Architecture(1, {1, 4, 1}));
    const double slope = 2.0 / eps;
    const double offsets[4] = {2.0, 1.0, -1.0, -2.0};
    const double signs[4] = {1.0, -1.0, -1.0, 1.0};
    for (int i = 0; i < 4; ++i) {
        net.weights[0](i, 0) = slope;
        net.biases[0][i] = (-2.0 * a) / eps + offsets[i];
        net.weights[1](0, i) = signs[i];
    }
    return net;
}

SeparationCertificate separate_by_coordinates(const PatternPartition& partition,
                                              const std::vector<int>& coords) {
    partition.validate();
    check_enumerable(partition);
    std::vector<int> j_sorted = coords;
    std::sort(j_sorted.begin(), j_sorted.end());
    j_sorted.erase(std::unique(j_sorted.begin(), j_sorted.end()), j_sorted.end());
    if (j_sorted.empty()) throw std::invalid_argument("separate_by_coordinates: empty coordinate set");
    for (int j : j_sorted) {
        if (j < 1 || j > partition.d) {
            throw std::invalid_argument("separate_by_coordinates: coordinate " + std::to_string(j) +
                                        " out of range");
        }
    }

    const auto k_cells = partition.cell_count();
    // precondition: the J-projection determines the cell
    std::map<Pattern, std::pair<int, Pattern>> code_owner;  // projected code -> (cell, witness)
    std::map<Pattern, double> code_value;                   // projected code -> k/K
    for (std::size_t k = 0; k < k_cells; ++k) {
        for (Pattern p : partition.cells[k]) {
            Pattern proj = 0;
            for (std::size_t pos = 0; pos < j_sorted.size(); ++pos) {
                if ((p >> (j_sorted[pos] - 1)) & 1u) proj |= Pattern{1} << pos;
            }
            auto [it, fresh] = code_owner.emplace(proj, std::make_pair(static_cast<int>(k), p));
            if (!fresh && it->second.first != static_cast<int>(k)) {
                throw std::invalid_argument(
                    "separate_by_coordinates: patterns " +
                    pattern_to_string(it->second.second, partition.d) + " and " +
                    pattern_to_string(p, partition.d) +
                    " agree on the selected coordinates but lie in cells " +
                    std::to_string(it->second.first + 1) + " and " + std::to_string(k + 1));
            }
            code_value[proj] =
                static_cast<double>(k + 1) / static_cast<double>(k_cells);
        }
    }

    // knots of the 1-D interpolant: realized integer codes, sorted
    std::vector<double> xs, ys;
    for (const auto& [code, value] : code_value) {  // std::map iterates in key order
        xs.push_back(static_cast<double>(code));
        ys.push_back(value);
    }
    const std::size_t m = xs.size();

    // f1: one hidden layer of ramps sigma(x - x_i); output bias carries the
    // level at the left end, unit i adjusts the slope at knot i. The final
    // unit flattens the function beyond the last knot.
    Mlp interp = Mlp::zeros(Architecture(1, {1, static_cast<int>(m), 1}));
    double prev_slope = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        interp.weights[0](i, 0) = 1.0;
        interp.biases[0][i] = -xs[i];
        double next_slope = i + 1 < m ? (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]) : 0.0;
        interp.weights[1](0, i) = next_slope - prev_slope;
        prev_slope = next_slope;
    }
    interp.biases[1][0] = ys[0];

    // integer encoding of the selected coordinates, as an affine map
    Mlp code = Mlp::zeros(Architecture(0, {partition.d, 1}));
    for (std::size_t pos = 0; pos < j_sorted.size(); ++pos) {
        code.weights[0](0, j_sorted[pos] - 1) = static_cast<double>(Pattern{1} << pos);
    }

    SeparationCertificate cert;
    cert.network = pad(compose(code, interp), 2);
    cert.margin = 1.0 / (2.0 * static_cast<double>(k_cells));
    for (std::size_t k = 0; k < k_cells; ++k) {
        cert.anchors.push_back({static_cast<double>(k + 1) / static_cast<double>(k_cells)});
    }

    std::string why;
    if (!verify_certificate(cert, partition, &why)) {
        throw std::logic_error("separate_by_coordinates: constructed certificate failed: " + why);
    }
    return cert;
}

SeparationCertificate separate_by_halfspaces(
    const PatternPartition& partition, const std::vector<std::vector<Halfspace>>& halfspaces) {
    partition.validate();
    check_enumerable(partition);
    const std::size_t k_cells = partition.cell_count();
    if (halfspaces.size() != k_cells) {
        throw std::invalid_argument("separate_by_halfspaces: need one halfspace list per cell");
    }
    std::size_t total_gates = 0;
    for (std::size_t k = 0; k < k_cells; ++k) {
        if (halfspaces[k].empty()) {
            throw std::invalid_argument("separate_by_halfspaces: cell " + std::to_string(k + 1) +
                                        " has no halfspaces");
        }
        for (const auto& h : halfspaces[k]) {
            if (h.v.size() != static_cast<std::size_t>(partition.d)) {
                throw std::invalid_argument("separate_by_halfspaces: halfspace dimension mismatch");
            }
        }
        total_gates += halfspaces[k].size();
    }

    const std::vector<Pattern> all = partition.all_patterns();
    auto violation = [&](Pattern p, std::size_t k) {
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& h : halfspaces[k]) {
            Vector w = pattern_to_vector(p, partition.d);
            double dot = 0.0;
            for (int j = 0; j < partition.d; ++j) dot += w[j] * h.v[j];
            worst = std::max(worst, dot - h.b);
        }
        return worst;
    };

    // precondition: each cell equals the intersection of its halfspaces with S
    double margin = std::numeric_limits<double>::infinity();
    for (Pattern p : all) {
        const int owner = partition.cell_of(p);
        for (std::size_t k = 0; k < k_cells; ++k) {
            const double worst = violation(p, k);
            const bool inside = worst <= 0.0;
            if (inside && static_cast<int>(k) != owner) {
                throw std::invalid_argument(
                    "separate_by_halfspaces: pattern " + pattern_to_string(p, partition.d) +
                    " satisfies the halfspaces of cell " + std::to_string(k + 1) +
                    " but belongs to cell " + std::to_string(owner + 1));
            }
            if (!inside && static_cast<int>(k) == owner) {
                throw std::invalid_argument(
                    "separate_by_halfspaces: pattern " + pattern_to_string(p, partition.d) +
                    " violates a halfspace of its own cell " + std::to_string(k + 1));
            }
            if (static_cast<int>(k) != owner) margin = std::min(margin, worst);
        }
    }
    double eps = margin;
    if (!std::isfinite(eps)) eps = 1.0;  // single cell: no foreign patterns
    if (eps <= 0.0) {
        throw std::invalid_argument("separate_by_halfspaces: violation margin is not positive");
    }

    // ramp gates phi_(k,l) = sigma(-(x.v - b)/eps + 1) - sigma(-(x.v - b)/eps),
    // one unit pair per halfspace; an AND layer per cell; output sums k * AND_k.
    Mlp net = Mlp::zeros(Architecture(
        2, {partition.d, static_cast<int>(2 * total_gates), static_cast<int>(k_cells), 1}));
    std::size_t gate = 0;
    for (std::size_t k = 0; k < k_cells; ++k) {
        int cell_gates = static_cast<int>(halfspaces[k].size());
        for (const auto& h : halfspaces[k]) {
            for (int part = 0; part < 2; ++part) {
                const std::size_t row = 2 * gate + part;
                for (int j = 0; j < partition.d; ++j) {
                    net.weights[0](row, j) = -h.v[j] / eps;
                }
                net.biases[0][row] = h.b / eps + (part == 0 ? 1.0 : 0.0);
            }
            net.weights[1](k, 2 * gate) = 1.0;
            net.weights[1](k, 2 * gate + 1) = -1.0;
            ++gate;
        }
        net.biases[1][k] = 1.0 - static_cast<double>(cell_gates);
        net.weights[2](0, k) = static_cast<double>(k + 1);
    }

    SeparationCertificate cert;
    cert.network = std::move(net);
    cert.margin = 0.5;
    for (std::size_t k = 0; k < k_cells; ++k) {
        cert.anchors.push_back({static_cast<double>(k + 1)});
    }
    std::string why;
    if (!verify_certificate(cert, partition, &why)) {
        throw std::logic_error("separate_by_halfspaces: constructed certificate failed: " + why);
    }
    return cert;
}

}  // namespace penn
