#include "doctest.h"
#include "penn/net_algebra.hpp"
#include "penn/penn_net.hpp"
#include "support.hpp"

using namespace penn;

namespace {

Penn random_penn(Rng& rng, int d = 3, int h1 = 5, int m = 2, int h3 = 6, int out = 1) {
    Penn net;
    net.f1 = Mlp::random(Architecture(2, {d, h1, h1, 3}), rng);
    net.f2 = Mlp::random(Architecture(1, {d, 4, m}), rng);
    net.f3 = Mlp::random(Architecture(2, {3 + m, h3, h3, out}), rng);
    net.budget.s = nonzero_count(net);
    net.validate();
    return net;
}

}  // namespace

TEST_CASE("penn_forward of all-zero subnetworks is zero") {
    Penn net;
    net.f1 = Mlp::zeros(Architecture(1, {2, 3, 2}));
    net.f2 = Mlp::zeros(Architecture(1, {2, 3, 1}));
    net.f3 = Mlp::zeros(Architecture(1, {3, 4, 1}));
    net.validate();
    Rng rng(1);
    for (int trial = 0; trial < 10; ++trial) {
        Vector z{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        Vector omega{static_cast<double>(rng.index(2)), static_cast<double>(rng.index(2))};
        CHECK(penn_forward(net, z, omega)[0] == 0.0);
    }
}

TEST_CASE("a combiner that projects the first block ignores the embedding") {
    Rng rng(2);
    Penn net = random_penn(rng);
    // f3 = projection onto the first coordinate of the concatenation
    net.f3 = Mlp::zeros(Architecture(0, {5, 1}));
    net.f3.weights[0](0, 0) = 1.0;
    net.validate();
    Vector z{0.3, -0.2, 0.9};
    Vector h1 = forward(net.f1, z);
    for (int pattern = 0; pattern < 8; ++pattern) {
        Vector omega{static_cast<double>(pattern & 1), static_cast<double>((pattern >> 1) & 1),
                     static_cast<double>((pattern >> 2) & 1)};
        CHECK(penn_forward(net, z, omega)[0] == doctest::Approx(h1[0]).epsilon(1e-15));
    }
}

TEST_CASE("penn_forward equals the independent compositional evaluation") {
    Rng rng(3);
    Penn net = random_penn(rng);
    for (int trial = 0; trial < 100; ++trial) {
        Vector z{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        Vector omega{static_cast<double>(rng.index(2)), static_cast<double>(rng.index(2)),
                     static_cast<double>(rng.index(2))};
        Vector h1 = testsupport::naive_forward(net.f1, z);
        Vector h2 = testsupport::naive_forward(net.f2, omega);
        Vector concat = h1;
        concat.insert(concat.end(), h2.begin(), h2.end());
        Vector want = testsupport::naive_forward(net.f3, concat);
        Vector got = penn_forward(net, z, omega);
        REQUIRE(got.size() == want.size());
        CHECK(got[0] == doctest::Approx(want[0]).epsilon(1e-12));
    }
}

TEST_CASE("embedding of the zero network is zero and identity nets pass bits through") {
    Penn net;
    net.f1 = Mlp::zeros(Architecture(1, {1, 2, 1}));
    net.f2 = Mlp::zeros(Architecture(1, {1, 2, 1}));
    net.f3 = Mlp::zeros(Architecture(1, {2, 2, 1}));
    net.validate();
    CHECK(embed(net, Vector{1.0})[0] == 0.0);

    // f2 realizing the identity: sigma(w) - sigma(-w)
    net.f2.weights[0](0, 0) = 1.0;
    net.f2.weights[0](1, 0) = -1.0;
    net.f2.weights[1](0, 0) = 1.0;
    net.f2.weights[1](0, 1) = -1.0;
    CHECK(embed(net, Vector{1.0})[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(embed(net, Vector{0.0})[0] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("the coordinate-separation network embeds Example 1 cells at k/K") {
    // cells split {0,1}^3 by the first coordinate; cell 1 has omega_1 = 1
    PatternPartition partition;
    partition.d = 3;
    partition.cells.resize(2);
    for (Pattern p = 0; p < 8; ++p) partition.cells[(p & 1u) ? 0 : 1].push_back(p);
    SeparationCertificate cert = separate_by_coordinates(partition, {1});

    Penn net;
    net.f1 = Mlp::zeros(Architecture(2, {3, 2, 2, 1}));
    net.f2 = cert.network;  // depth 2, output width 1
    net.f3 = Mlp::zeros(Architecture(1, {2, 2, 1}));
    net.validate();
    for (Pattern p = 0; p < 8; ++p) {
        Vector omega = pattern_to_vector(p, 3);
        const double value = embed(net, omega)[0];
        const double want = (p & 1u) ? 0.5 : 1.0;
        CHECK(value == doctest::Approx(want).epsilon(1e-12));
    }
    CHECK(cert.margin == doctest::Approx(0.25));
}

TEST_CASE("penn loss and gradient: zero fixture and a dead embedding branch") {
    SUBCASE("all zero") {
        Penn net;
        net.f1 = Mlp::zeros(Architecture(1, {2, 3, 1}));
        net.f2 = Mlp::zeros(Architecture(1, {2, 3, 1}));
        net.f3 = Mlp::zeros(Architecture(1, {2, 3, 1}));
        Matrix z(3, 2), omega(3, 2);
        Targets y = Targets::squared(Matrix(3, 1));
        PennGrad grad = PennGrad::zeros_like(net);
        CHECK(penn_loss_and_grad(net, z, omega, y, &grad) == 0.0);
        for (double v : testsupport::flat_grad(grad)) CHECK(v == 0.0);
    }
    SUBCASE("combiner ignoring the embedding zeroes the f2 gradient") {
        Rng rng(4);
        Penn net = random_penn(rng);
        net.f3 = Mlp::zeros(Architecture(0, {5, 1}));
        net.f3.weights[0](0, 0) = 1.0;
        net.f3.weights[0](0, 1) = -2.0;
        net.f3.weights[0](0, 2) = 0.5;  // reads only the f1 block (width 3)
        Matrix z(4, 3), omega(4, 3);
        for (double& v : z.data) v = rng.uniform(-1.0, 1.0);
        for (double& v : omega.data) v = static_cast<double>(rng.index(2));
        Targets y = Targets::squared(Matrix(4, 1));
        for (double& v : y.values.data) v = rng.uniform(-1.0, 1.0);
        PennGrad grad = PennGrad::zeros_like(net);
        penn_loss_and_grad(net, z, omega, y, &grad);
        for (double v : testsupport::flat_grad(grad.g2)) CHECK(v == 0.0);
        bool any_nonzero = false;
        for (double v : testsupport::flat_grad(grad.g1)) any_nonzero |= v != 0.0;
        CHECK(any_nonzero);
    }
}

TEST_CASE("penn analytic gradients match finite differences") {
    Rng rng(5);
    for (int trial = 0; trial < 4; ++trial) {
        Penn net = random_penn(rng);
        Matrix z(4, 3), omega(4, 3);
        for (double& v : z.data) v = rng.uniform(-1.0, 1.0);
        for (double& v : omega.data) v = static_cast<double>(rng.index(2));
        Targets y = Targets::squared(Matrix(4, 1));
        for (double& v : y.values.data) v = rng.uniform(-1.0, 1.0);

        PennGrad grad = PennGrad::zeros_like(net);
        penn_loss_and_grad(net, z, omega, y, &grad);

        std::vector<bool> eligible;
        testsupport::mlp_eligibility(net.f1, z, 1e-3, eligible);
        testsupport::mlp_eligibility(net.f2, omega, 1e-3, eligible);
        Matrix h1 = forward_batch(net.f1, z);
        Matrix h2 = forward_batch(net.f2, omega);
        Matrix concat(4, h1.cols + h2.cols);
        for (std::size_t i = 0; i < 4; ++i) {
            std::copy(h1.row_ptr(i), h1.row_ptr(i) + h1.cols, concat.row_ptr(i));
            std::copy(h2.row_ptr(i), h2.row_ptr(i) + h2.cols, concat.row_ptr(i) + h1.cols);
        }
        testsupport::mlp_eligibility(net.f3, concat, 1e-3, eligible);

        auto loss_at = [&](const Vector& theta) {
            Penn probe = net;
            testsupport::set_flat_params(probe, theta);
            return penn_loss_and_grad(probe, z, omega, y, nullptr);
        };
        auto check = testsupport::fd_check(loss_at, testsupport::flat_params(net),
                                           testsupport::flat_grad(grad), eligible);
        CHECK(check.pass_fraction() >= 0.99);
        CHECK(check.eligible > 0);
    }
}

TEST_CASE("build_paper_penn produces the experiment architectures") {
    Rng rng(6);
    Penn net = build_paper_penn(20, Task::regression(), rng);
    CHECK(net.f1.arch == Architecture(3, {20, 70, 70, 70, 70}));
    CHECK(net.f2.arch == Architecture(2, {20, 30, 30, 3}));
    CHECK(net.f3.arch == Architecture(3, {73, 70, 70, 70, 1}));
    const std::size_t v_total = net.f1.arch.param_count() + net.f2.arch.param_count() +
                                net.f3.arch.param_count();
    CHECK(net.budget.s == v_total);
    CHECK(nonzero_count(net) <= v_total);

    Penn wide = build_paper_penn(304, Task::regression(), rng, 100);
    CHECK(wide.f3.arch.input_dim() == 103);
    CHECK(wide.f3.arch == Architecture(3, {103, 100, 100, 100, 1}));

    Penn cls = build_paper_penn(13, Task::classification(2), rng, 100);
    CHECK(cls.f3.arch.output_dim() == 2);

    Mlp nn = build_paper_nn(20, Task::regression(), rng);
    CHECK(nn.arch == Architecture(6, {20, 70, 70, 70, 70, 70, 70, 1}));
}

TEST_CASE("penn validation rejects a mismatched combiner input width") {
    Penn net;
    net.f1 = Mlp::zeros(Architecture(1, {2, 3, 2}));
    net.f2 = Mlp::zeros(Architecture(1, {2, 3, 1}));
    net.f3 = Mlp::zeros(Architecture(1, {4, 3, 1}));  // needs 3
    CHECK_THROWS_WITH_AS(net.validate(), doctest::Contains("combiner"), std::invalid_argument);
}
