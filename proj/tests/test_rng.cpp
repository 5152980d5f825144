#include <doctest.h>

#include <cmath>
#include <initializer_list>

#include "plmdp/rng.hpp"

using namespace plmdp;

TEST_CASE("normal_quantile round-trips through the CDF") {
    for (double u : {1e-10, 1e-6, 1e-3, 0.02, 0.2, 0.5, 0.7, 0.97, 1 - 1e-6, 1 - 1e-10}) {
        const double x = normal_quantile(u);
        CHECK(normal_cdf(x) == doctest::Approx(u).epsilon(1e-12));
    }
    CHECK(normal_quantile(0.5) == 0.0);
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK_THROWS(normal_quantile(0.0));
    CHECK_THROWS(normal_quantile(1.0));
}

TEST_CASE("counter generator is reproducible and order-independent") {
    CounterRng a(42, 3, 17);
    CounterRng b(42, 3, 17);
    for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());

    CounterRng c(42, 3, 17);
    CHECK(c.uniform_at(57) == c.uniform_at(57));
    CounterRng other(42, 3, 18);
    CHECK(c.uniform_at(0) != other.uniform_at(0));
}

TEST_CASE("uniforms live strictly inside (0,1) and look uniform") {
    CounterRng rng(9, 0, 0);
    double sum = 0.0, sum_sq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        sum_sq += u * u;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.02));
    CHECK(sum_sq / n == doctest::Approx(1.0 / 3.0).epsilon(0.03));
}

TEST_CASE("normals and truncated normals have the expected shape") {
    CounterRng rng(123, 1, 2);
    const int n = 20000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sum_sq += x * x;
    }
    CHECK(std::abs(sum / n) < 0.03);
    CHECK(sum_sq / n == doctest::Approx(1.0).epsilon(0.05));

    for (int i = 0; i < 5000; ++i) {
        const double t = rng.truncated_normal(3.0);
        REQUIRE(t > -3.0);
        REQUIRE(t < 3.0);
    }
}
