#include "doctest.h"

#include <cmath>

#include "plato/diff.hpp"
#include "plato/rng.hpp"

using namespace plato;

namespace {

// Wraps a DenseNet plus a scalar loss Sum(out^2) for checking.
class NetObjective : public DiffFunction {
public:
    NetObjective(DenseNet<double>& net, Tensor2<double> input)
        : net_(net), input_(std::move(input)) {}

    std::size_t param_count() const override { return net_.param_count(); }

    void get_params(std::span<double> out) const override {
        std::size_t k = 0;
        const_cast<DenseNet<double>&>(net_).for_each_block(
            [&](std::span<double> p, std::span<double>) {
                for (double v : p) {
                    out[k++] = v;
                }
            });
    }
    void set_params(std::span<const double> in) override {
        std::size_t k = 0;
        net_.for_each_block([&](std::span<double> p, std::span<double>) {
            for (auto& v : p) {
                v = in[k++];
            }
        });
    }
    double value() override {
        const auto& out = net_.forward(input_);
        double acc = 0.0;
        for (double v : out.data) {
            acc += v * v;
        }
        return acc;
    }
    double value_and_gradient(std::span<double> grad) override {
        net_.zero_grad();
        const auto& out = net_.forward(input_);
        double acc = 0.0;
        Tensor2<double> upstream(out.rows, out.cols);
        for (std::size_t i = 0; i < out.data.size(); ++i) {
            acc += out.data[i] * out.data[i];
            upstream.data[i] = 2.0 * out.data[i];
        }
        net_.backward(upstream);
        std::size_t k = 0;
        net_.for_each_block([&](std::span<double>, std::span<double> g) {
            for (double v : g) {
                grad[k++] = v;
            }
        });
        return acc;
    }

private:
    DenseNet<double>& net_;
    Tensor2<double> input_;
};

}  // namespace

TEST_CASE("forward: identity single layer reproduces the input") {
    DenseNet<double> net({3, 3}, Activation::Identity, 1);
    auto& layer = net.layers()[0];
    layer.w.fill(0.0);
    for (int i = 0; i < 3; ++i) {
        layer.w(i, i) = 1.0;
    }
    Tensor2<double> x(2, 3);
    for (int i = 0; i < 6; ++i) {
        x.data[i] = 0.5 * i - 1.0;
    }
    const auto& out = net.forward(x);
    CHECK(out.data == x.data);
}

TEST_CASE("forward: relu of all-negative pre-activations is zero") {
    DenseNet<double> net({2, 4, 2}, Activation::Relu, 3);
    // Make the hidden pre-activations strictly negative regardless of input sign.
    net.layers()[0].w.fill(0.0);
    net.layers()[0].b.assign(4, -1.0);
    Tensor2<double> x(1, 2);
    x(0, 0) = 2.0;
    x(0, 1) = -3.0;
    const auto& out = net.forward(x);
    // hidden = relu(-1) = 0, so output = bias of last layer = 0
    for (double v : out.data) {
        CHECK(v == 0.0);
    }
}

TEST_CASE("forward: 1x1 affine, w=2 b=1 x=3 -> 7") {
    DenseNet<double> net({1, 1}, Activation::Identity, 1);
    net.layers()[0].w(0, 0) = 2.0;
    net.layers()[0].b[0] = 1.0;
    Tensor2<double> x(1, 1);
    x(0, 0) = 3.0;
    CHECK(net.forward(x)(0, 0) == doctest::Approx(7.0));
}

TEST_CASE("forward shape mismatch throws") {
    DenseNet<double> net({3, 2}, Activation::Identity, 1);
    Tensor2<double> x(1, 4);
    CHECK_THROWS_AS(net.forward(x), ValidationError);
}

TEST_CASE("backward without forward is a state error") {
    DenseNet<double> net({2, 1}, Activation::Identity, 1);
    Tensor2<double> up(1, 1);
    CHECK_THROWS_AS(net.backward(up), RuntimeFailure);
}

TEST_CASE("backward: loss yhat^2 with yhat = w*x, x=1, w=3 gives dL/dw = 6") {
    DenseNet<double> net({1, 1}, Activation::Identity, 1);
    net.layers()[0].w(0, 0) = 3.0;
    net.layers()[0].b[0] = 0.0;
    Tensor2<double> x(1, 1);
    x(0, 0) = 1.0;
    const auto& out = net.forward(x);
    net.zero_grad();
    Tensor2<double> up(1, 1);
    up(0, 0) = 2.0 * out(0, 0);  // d(yhat^2)/dyhat
    net.backward(up);
    CHECK(net.layers()[0].dw(0, 0) == doctest::Approx(6.0));
    CHECK(net.layers()[0].db[0] == doctest::Approx(2.0 * 3.0));
}

TEST_CASE("backward: gradient at the loss minimum is zero") {
    DenseNet<double> net({2, 1}, Activation::Identity, 5);
    Tensor2<double> x(1, 2);
    x(0, 0) = 1.0;
    x(0, 1) = -2.0;
    const auto& out = net.forward(x);
    // MSE against target equal to the prediction itself
    net.zero_grad();
    Tensor2<double> up(1, 1);
    up(0, 0) = 2.0 * (out(0, 0) - out(0, 0));
    net.backward(up);
    net.for_each_block([](std::span<double>, std::span<double> g) {
        for (double v : g) {
            CHECK(v == 0.0);
        }
    });
}

TEST_CASE("grad_check: random 3-layer nets match finite differences") {
    for (std::uint64_t seed : {101ULL, 102ULL, 103ULL}) {
        for (Activation act : {Activation::Tanh, Activation::Relu, Activation::Identity}) {
            DenseNet<double> net({4, 6, 5, 2}, act, seed);
            Rng rng(seed + 7);
            Tensor2<double> x(3, 4);
            for (auto& v : x.data) {
                v = rng.normal();
            }
            NetObjective fn(net, x);
            CHECK(grad_check(fn, 1e-5) < 1e-4);
        }
    }
}

TEST_CASE("grad_check on fn(w) = w^2 at w=3") {
    struct Square : DiffFunction {
        double w = 3.0;
        std::size_t param_count() const override { return 1; }
        void get_params(std::span<double> out) const override { out[0] = w; }
        void set_params(std::span<const double> in) override { w = in[0]; }
        double value() override { return w * w; }
        double value_and_gradient(std::span<double> grad) override {
            grad[0] = 2.0 * w;
            return w * w;
        }
    } fn;
    CHECK(grad_check(fn, 1e-5) < 1e-8);  // central differences are exact on quadratics
}

TEST_CASE("grad_check on a constant function returns zero error") {
    struct Constant : DiffFunction {
        double w = 1.0;
        std::size_t param_count() const override { return 1; }
        void get_params(std::span<double> out) const override { out[0] = w; }
        void set_params(std::span<const double> in) override { w = in[0]; }
        double value() override { return 42.0; }
        double value_and_gradient(std::span<double> grad) override {
            grad[0] = 0.0;
            return 42.0;
        }
    } fn;
    CHECK(grad_check(fn, 1e-5) == 0.0);
}

TEST_CASE("param_count matches the analytic formula") {
    DenseNet<double> net({7, 5, 3, 1}, Activation::Relu, 1);
    CHECK(net.param_count() == (7 + 1) * 5 + (5 + 1) * 3 + (3 + 1) * 1);
}

TEST_CASE("forward is pure: repeated calls are bitwise identical") {
    DenseNet<double> net({3, 8, 1}, Activation::Tanh, 9);
    Rng rng(10);
    Tensor2<double> x(2, 3);
    for (auto& v : x.data) {
        v = rng.normal();
    }
    const auto a = net.forward(x).data;
    const auto b = net.forward(x).data;
    CHECK(a == b);
}

TEST_CASE("softmax") {
    SUBCASE("singleton") {
        std::vector<double> v{3.7};
        softmax_inplace(std::span<double>(v));
        CHECK(v[0] == 1.0);
    }
    SUBCASE("uniform logits") {
        std::vector<double> v{0.0, 0.0, 0.0};
        softmax_inplace(std::span<double>(v));
        for (double x : v) {
            CHECK(x == doctest::Approx(1.0 / 3.0));
        }
    }
    SUBCASE("[ln 2, 0] -> [2/3, 1/3]") {
        std::vector<double> v{std::log(2.0), 0.0};
        softmax_inplace(std::span<double>(v));
        CHECK(v[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
        CHECK(v[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
    SUBCASE("large logits stay finite") {
        std::vector<double> v{1000.0, 999.0};
        softmax_inplace(std::span<double>(v));
        CHECK(std::isfinite(v[0]));
        CHECK(v[0] + v[1] == doctest::Approx(1.0));
    }
    SUBCASE("empty input throws") {
        std::vector<double> v;
        CHECK_THROWS_AS(softmax_inplace(std::span<double>(v)), ValidationError);
    }
}

TEST_CASE("mse_loss") {
    std::vector<double> pred{1.0, 2.0, 3.0};
    std::vector<double> target{1.0, 2.0, 5.0};
    CHECK(mse_loss<double>(pred, target) == doctest::Approx(4.0 / 3.0));
}
