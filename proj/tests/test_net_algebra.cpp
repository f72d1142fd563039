#include <cmath>

#include "doctest.h"
#include "penn/net_algebra.hpp"
#include "support.hpp"

using namespace penn;

namespace {

Vector random_input(Rng& rng, int d) {
    Vector x(d);
    for (double& v : x) v = rng.uniform(-3.0, 3.0);
    return x;
}

void check_pointwise_equal(const Mlp& a, const Mlp& b, Rng& rng, int n = 1000) {
    REQUIRE(a.arch.input_dim() == b.arch.input_dim());
    for (int trial = 0; trial < n; ++trial) {
        Vector x = random_input(rng, a.arch.input_dim());
        Vector ya = forward(a, x);
        Vector yb = forward(b, x);
        REQUIRE(ya.size() == yb.size());
        for (std::size_t i = 0; i < ya.size(); ++i) {
            CHECK(ya[i] == doctest::Approx(yb[i]).epsilon(1e-12));
        }
    }
}

double bump_closed_form(double a, double eps, double x) {
    if (x <= a - eps || x >= a + eps) return 0.0;
    if (x >= a - eps / 2.0 && x <= a + eps / 2.0) return 1.0;
    if (x < a) return (x - (a - eps)) * 2.0 / eps;
    return ((a + eps) - x) * 2.0 / eps;
}

PatternPartition first_coordinate_partition(int d) {
    PatternPartition p;
    p.d = d;
    p.cells.resize(2);
    for (Pattern w = 0; w < (Pattern{1} << d); ++w) {
        p.cells[(w & 1u) ? 0 : 1].push_back(w);
    }
    return p;
}

}  // namespace

TEST_CASE("compose: identity-affine before a network changes nothing") {
    Rng rng(41);
    Mlp g = Mlp::random(Architecture(2, {3, 6, 5, 2}), rng);
    Mlp id = Mlp::zeros(Architecture(0, {3, 3}));
    for (int j = 0; j < 3; ++j) id.weights[0](j, j) = 1.0;
    Mlp composed = compose(id, g);
    check_pointwise_equal(composed, g, rng);
}

TEST_CASE("compose equals sequential evaluation and merges the junction widths") {
    Rng rng(42);
    Mlp f1 = Mlp::random(Architecture(2, {3, 7, 4, 5}), rng);
    Mlp f2 = Mlp::random(Architecture(1, {5, 6, 2}), rng);
    Mlp composed = compose(f1, f2);
    CHECK(composed.arch == Architecture(3, {3, 7, 4, 6, 2}));
    for (int trial = 0; trial < 1000; ++trial) {
        Vector x = random_input(rng, 3);
        Vector want = forward(f2, forward(f1, x));
        Vector got = forward(composed, x);
        for (std::size_t i = 0; i < want.size(); ++i) {
            CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
        }
    }
    // composition never needs more nonzeros than both nets plus a full junction
    const std::size_t junction_cap = 6 * (4 + 1);
    CHECK(nonzero_count(composed) <=
          nonzero_count(f1) + nonzero_count(f2) + junction_cap);

    CHECK_THROWS_AS(compose(f2, f1), std::invalid_argument);
}

TEST_CASE("pad to the same depth is a structural copy") {
    Rng rng(43);
    Mlp f = Mlp::random(Architecture(2, {2, 4, 4, 1}), rng);
    Mlp same = pad(f, 2);
    CHECK(same.arch == f.arch);
    for (std::size_t l = 0; l < f.weights.size(); ++l) {
        CHECK(same.weights[l].data == f.weights[l].data);
        CHECK(same.biases[l] == f.biases[l]);
    }
}

TEST_CASE("pad preserves the function, including negative outputs") {
    Rng rng(44);
    Mlp f = Mlp::random(Architecture(1, {2, 5, 3}), rng);
    Mlp padded = pad(f, 3);
    CHECK(padded.arch == Architecture(3, {2, 5, 6, 6, 3}));
    check_pointwise_equal(padded, f, rng);
}

TEST_CASE("pad sparsity stays within 2s + 2 p_out (L2 - L1)") {
    // a depth-1 scalar net with exactly 10 nonzeros
    Mlp f = Mlp::zeros(Architecture(1, {2, 4, 1}));
    Rng rng(45);
    int placed = 0;
    for (std::size_t i = 0; i < f.weights[0].size() && placed < 6; ++i, ++placed) {
        f.weights[0].data[i] = rng.uniform(0.5, 1.0);
    }
    for (std::size_t i = 0; i < 3; ++i) f.biases[0][i] = 1.0 + static_cast<double>(i);
    f.weights[1](0, 0) = 2.0;
    REQUIRE(nonzero_count(f) == 10);
    Mlp padded = pad(f, 3);
    CHECK(nonzero_count(padded) <= 2 * 10 + 2 * 1 * 2);
    check_pointwise_equal(padded, f, rng, 200);
}

TEST_CASE("parallelize stacks outputs and adds widths and sparsity") {
    Rng rng(46);
    Mlp a = Mlp::random(Architecture(1, {3, 4, 2}), rng);
    Mlp b = Mlp::random(Architecture(1, {3, 5, 1}), rng);

    Mlp single = parallelize({a});
    check_pointwise_equal(single, a, rng, 200);

    Mlp both = parallelize({a, b});
    CHECK(both.arch == Architecture(1, {3, 9, 3}));
    CHECK(nonzero_count(both) == nonzero_count(a) + nonzero_count(b));
    for (int trial = 0; trial < 1000; ++trial) {
        Vector x = random_input(rng, 3);
        Vector ya = forward(a, x);
        Vector yb = forward(b, x);
        Vector got = forward(both, x);
        REQUIRE(got.size() == 3);
        CHECK(got[0] == doctest::Approx(ya[0]).epsilon(1e-12));
        CHECK(got[1] == doctest::Approx(ya[1]).epsilon(1e-12));
        CHECK(got[2] == doctest::Approx(yb[0]).epsilon(1e-12));
    }

    CHECK_THROWS_AS(parallelize({}), std::invalid_argument);
    Mlp deeper = Mlp::random(Architecture(2, {3, 4, 4, 1}), rng);
    CHECK_THROWS_WITH_AS(parallelize({a, deeper}), doctest::Contains("pad first"),
                         std::invalid_argument);
}

TEST_CASE("enlarge zero-fills into a dominating architecture") {
    Rng rng(47);
    Mlp f = Mlp::random(Architecture(1, {3, 2, 1}), rng);

    Mlp same = enlarge(f, f.arch);
    for (std::size_t l = 0; l < f.weights.size(); ++l) {
        CHECK(same.weights[l].data == f.weights[l].data);
    }

    Mlp wide = enlarge(f, Architecture(1, {3, 5, 1}));
    CHECK(nonzero_count(wide) == nonzero_count(f));
    check_pointwise_equal(wide, f, rng);

    CHECK_THROWS_AS(enlarge(wide, f.arch), std::invalid_argument);
    CHECK_THROWS_AS(enlarge(f, Architecture(1, {4, 5, 1})), std::invalid_argument);
}

TEST_CASE("bump gate matches its closed form on a dense grid") {
    Rng rng(48);
    Mlp gate = bump_gate(0.0, 1.0);
    CHECK(gate.arch == Architecture(1, {1, 4, 1}));
    CHECK(nonzero_count(gate) <= 12);
    CHECK(forward(gate, Vector{0.0})[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(forward(gate, Vector{1.5})[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(forward(gate, Vector{-1.5})[0] == doctest::Approx(0.0).epsilon(1e-15));

    for (int config = 0; config < 4; ++config) {
        const double a = rng.uniform(-2.0, 2.0);
        const double eps = rng.uniform(0.05, 2.0);
        Mlp g = bump_gate(a, eps);
        for (int i = 0; i <= 10000; ++i) {
            const double x = a - 2.0 * eps + 4.0 * eps * i / 10000.0;
            const double got = forward(g, Vector{x})[0];
            const double want = bump_closed_form(a, eps, x);
            CHECK(got == doctest::Approx(want).epsilon(1e-12));
            CHECK(got >= -1e-12);
            CHECK(got <= 1.0 + 1e-12);
        }
    }
    CHECK_THROWS_AS(bump_gate(0.0, 0.0), std::invalid_argument);
}

TEST_CASE("partition validation names the shared pattern of overlapping cells") {
    PatternPartition p;
    p.d = 3;
    p.cells = {{0b001, 0b010}, {0b010, 0b100}};
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("010"), std::invalid_argument);

    PatternPartition empty_cell;
    empty_cell.d = 2;
    empty_cell.cells = {{0b01}, {}};
    CHECK_THROWS_AS(empty_cell.validate(), std::invalid_argument);
}

TEST_CASE("coordinate separation reproduces the Example 1 certificate") {
    PatternPartition partition = first_coordinate_partition(4);
    SeparationCertificate cert = separate_by_coordinates(partition, {1});
    CHECK(cert.margin == doctest::Approx(0.25));
    REQUIRE(cert.anchors.size() == 2);
    CHECK(cert.anchors[0][0] == doctest::Approx(0.5));
    CHECK(cert.anchors[1][0] == doctest::Approx(1.0));
    CHECK(cert.network.arch.depth == 2);
    for (Pattern w = 0; w < 16; ++w) {
        const double value = forward(cert.network, pattern_to_vector(w, 4))[0];
        CHECK(value == doctest::Approx((w & 1u) ? 0.5 : 1.0).epsilon(1e-12));
    }
    std::string why;
    CHECK(verify_certificate(cert, partition, &why));
}

TEST_CASE("coordinate separation of a single cell yields a constant network") {
    PatternPartition partition;
    partition.d = 3;
    partition.cells.resize(1);
    for (Pattern w = 0; w < 8; ++w) partition.cells[0].push_back(w);
    SeparationCertificate cert = separate_by_coordinates(partition, {1, 2, 3});
    CHECK(cert.margin > 0.0);
    for (Pattern w = 0; w < 8; ++w) {
        CHECK(forward(cert.network, pattern_to_vector(w, 3))[0] ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(verify_certificate(cert, partition));
}

TEST_CASE("coordinate separation passes exhaustive verification on random partitions") {
    Rng rng(49);
    for (int trial = 0; trial < 10; ++trial) {
        PatternPartition partition;
        partition.d = 5;
        partition.cells.resize(4);
        for (Pattern w = 0; w < 32; ++w) {
            partition.cells[rng.index(4)].push_back(w);
        }
        // re-draw until no cell is empty
        bool ok = true;
        for (const auto& cell : partition.cells) ok &= !cell.empty();
        if (!ok) continue;
        SeparationCertificate cert = separate_by_coordinates(partition, {1, 2, 3, 4, 5});
        CHECK(cert.margin == doctest::Approx(1.0 / 8.0));
        std::string why;
        CHECK_MESSAGE(verify_certificate(cert, partition, &why), why);
        // constant on every cell, exactly over S
        for (std::size_t k = 0; k < partition.cells.size(); ++k) {
            const double anchor = cert.anchors[k][0];
            for (Pattern w : partition.cells[k]) {
                CHECK(forward(cert.network, pattern_to_vector(w, 5))[0] ==
                      doctest::Approx(anchor).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("coordinate separation rejects partitions the coordinates cannot tell apart") {
    PatternPartition partition;
    partition.d = 3;
    // 001 and 011 agree on coordinate 1 but land in different cells
    partition.cells = {{0b001}, {0b011}};
    CHECK_THROWS_WITH_AS(separate_by_coordinates(partition, {1}), doctest::Contains("agree"),
                         std::invalid_argument);
    CHECK_THROWS_AS(separate_by_coordinates(partition, {7}), std::invalid_argument);
}

TEST_CASE("the enumeration guard rejects d > 20") {
    PatternPartition partition;
    partition.d = 21;
    partition.cells = {{0b1}};
    CHECK_THROWS_WITH_AS(separate_by_coordinates(partition, {1}), doctest::Contains("guard"),
                         std::invalid_argument);
}

TEST_CASE("halfspace separation encodes Example 1 and hits the stated architecture") {
    PatternPartition partition = first_coordinate_partition(4);
    // S1 = {omega : -omega_1 <= -1}, S2 = {omega : omega_1 <= 0}
    std::vector<std::vector<Halfspace>> halfspaces(2);
    halfspaces[0].push_back({Vector{-1.0, 0.0, 0.0, 0.0}, -1.0});
    halfspaces[1].push_back({Vector{1.0, 0.0, 0.0, 0.0}, 0.0});
    SeparationCertificate cert = separate_by_halfspaces(partition, halfspaces);
    CHECK(cert.network.arch == Architecture(2, {4, 4, 2, 1}));
    for (Pattern w = 0; w < 16; ++w) {
        const double value = forward(cert.network, pattern_to_vector(w, 4))[0];
        CHECK(value == doctest::Approx((w & 1u) ? 1.0 : 2.0).epsilon(1e-12));
    }
    CHECK(verify_certificate(cert, partition));
}

TEST_CASE("a vacuous halfspace covering everything yields the constant 1") {
    PatternPartition partition;
    partition.d = 3;
    partition.cells.resize(1);
    for (Pattern w = 0; w < 8; ++w) partition.cells[0].push_back(w);
    std::vector<std::vector<Halfspace>> halfspaces(1);
    halfspaces[0].push_back({Vector{0.0, 0.0, 0.0}, 0.0});
    SeparationCertificate cert = separate_by_halfspaces(partition, halfspaces);
    for (Pattern w = 0; w < 8; ++w) {
        CHECK(forward(cert.network, pattern_to_vector(w, 3))[0] ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("halfspace separation checks the cell/intersection precondition") {
    PatternPartition partition = first_coordinate_partition(3);
    std::vector<std::vector<Halfspace>> wrong(2);
    wrong[0].push_back({Vector{0.0, 0.0, 0.0}, 0.0});  // claims everything
    wrong[1].push_back({Vector{1.0, 0.0, 0.0}, 0.0});
    CHECK_THROWS_AS(separate_by_halfspaces(partition, wrong), std::invalid_argument);
}

TEST_CASE("count-of-ones interval cells verify through the halfspace route") {
    Rng rng(50);
    const int d = 6;
    for (int trial = 0; trial < 5; ++trial) {
        // cells by intervals of the number of observed coordinates
        std::vector<int> cuts{0, 2 + static_cast<int>(rng.index(2)),
                              4 + static_cast<int>(rng.index(2)), d + 1};
        PatternPartition partition;
        partition.d = d;
        partition.cells.resize(3);
        for (Pattern w = 0; w < (Pattern{1} << d); ++w) {
            const int ones = __builtin_popcount(w);
            for (std::size_t k = 0; k < 3; ++k) {
                if (ones >= cuts[k] && ones < cuts[k + 1]) partition.cells[k].push_back(w);
            }
        }
        std::vector<std::vector<Halfspace>> halfspaces(3);
        for (std::size_t k = 0; k < 3; ++k) {
            halfspaces[k].push_back({Vector(d, 1.0), static_cast<double>(cuts[k + 1] - 1)});
            halfspaces[k].push_back({Vector(d, -1.0), -static_cast<double>(cuts[k])});
        }
        SeparationCertificate cert = separate_by_halfspaces(partition, halfspaces);
        std::string why;
        CHECK_MESSAGE(verify_certificate(cert, partition, &why), why);
    }
}
