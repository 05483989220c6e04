#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "wsnsim/core.hpp"

using namespace wsnsim;

namespace {

// Independent straight-line evaluation of the election threshold, kept free
// of any shared code with the implementation.
double threshold_oracle(double p, double c, double k, int round, double upper,
                        double lower, double d, double e_cur, double e_init,
                        int rounds_since_ch) {
    const int window = static_cast<int>(std::ceil(1.0 / p));
    if (rounds_since_ch < window) return 0.0;
    if (e_cur <= 0.0) return 0.0;
    d = std::min(std::max(d, lower), upper);
    const double f_r = std::max(1, round % window);
    double t = (p * c * (upper - d)) / ((1.0 - p) * f_r * (upper - lower));
    double ratio = std::min(1.0, std::max(0.0, e_cur / e_init));
    t *= std::pow(ratio, k);
    return std::min(1.0, std::max(0.0, t));
}

NodeState make_node(double e_cur, double e_init, int level = 1) {
    NodeState n;
    n.id = 1;
    n.energy_j = e_cur;
    n.energy_init_j = e_init;
    n.level = level;
    return n;
}

}  // namespace

TEST_CASE("ch_threshold matches the worked example") {
    NodeState n = make_node(0.25, 0.5);
    LevelBand band{1, 100.0, 200.0};
    ThresholdParams params{0.05, 0.5, 2.0};
    const double t = ch_threshold(n, 3, band, params, 150.0);
    // (0.05*0.5*50) / (0.95*3*100) * (0.5)^2
    CHECK(t == doctest::Approx(0.0010964912280701755).epsilon(1e-12));
}

TEST_CASE("ch_threshold zero cases") {
    LevelBand band{1, 100.0, 200.0};
    ThresholdParams params{0.05, 0.5, 2.0};

    NodeState dead = make_node(0.0, 0.5);
    CHECK(ch_threshold(dead, 3, band, params, 150.0) == 0.0);

    NodeState edge = make_node(0.5, 0.5);
    CHECK(ch_threshold(edge, 3, band, params, 200.0) == 0.0);  // d = U_i

    NodeState served = make_node(0.5, 0.5);
    served.rounds_since_ch = 5;  // inside the Z window of ceil(1/P) = 20
    CHECK(ch_threshold(served, 3, band, params, 150.0) == 0.0);
    served.rounds_since_ch = 20;
    CHECK(ch_threshold(served, 3, band, params, 150.0) > 0.0);
}

TEST_CASE("ch_threshold clamps into [0,1] and rejects bad parameters") {
    LevelBand band{1, 100.0, 200.0};
    NodeState n = make_node(0.5, 0.5);

    // extreme parameters drive the raw formula above 1
    ThresholdParams hot{0.9, 1.0, 0.0};
    CHECK(ch_threshold(n, 1, band, hot, 100.0) == 1.0);

    ThresholdParams params{0.05, 0.5, 2.0};
    LevelBand bad{1, 200.0, 100.0};
    CHECK_THROWS_AS(ch_threshold(n, 3, bad, params, 150.0), std::invalid_argument);
    CHECK_THROWS_AS(ch_threshold(n, 3, band, ThresholdParams{0.0, 0.5, 2.0}, 150.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(ch_threshold(n, 3, band, ThresholdParams{0.05, 0.0, 2.0}, 150.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(ch_threshold(n, 3, band, ThresholdParams{0.05, 0.5, 3.5}, 150.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(ch_threshold(n, 0, band, params, 150.0), std::invalid_argument);
}

TEST_CASE("ch_threshold agrees with the independent oracle on 10^4 draws") {
    std::mt19937_64 gen(20240817);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        const double p = 0.01 + 0.89 * uni(gen);
        const double c = 0.05 + 0.95 * uni(gen);
        const double k = 3.0 * uni(gen);
        const double lower = 400.0 * uni(gen);
        const double upper = lower + 1.0 + 600.0 * uni(gen);
        const double d = lower + (upper - lower) * uni(gen);
        const double e_init = 0.1 + uni(gen);
        const double e_cur = e_init * uni(gen);
        const int round = 1 + static_cast<int>(uni(gen) * 50);

        NodeState n = make_node(e_cur, e_init);
        LevelBand band{1, lower, upper};
        const double got = ch_threshold(n, round, band, ThresholdParams{p, c, k}, d);
        const double want = threshold_oracle(p, c, k, round, upper, lower, d, e_cur,
                                             e_init, n.rounds_since_ch);
        CHECK(got >= 0.0);
        CHECK(got <= 1.0);
        if (want > 0.0) {
            CHECK(std::abs(got - want) / want < 1e-12);
        } else {
            CHECK(got == want);
        }
    }
}

TEST_CASE("ch_threshold monotone in residual energy and distance") {
    LevelBand band{1, 100.0, 300.0};
    ThresholdParams params{0.05, 0.5, 2.0};
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const double e1 = uni(gen), e2 = uni(gen);
        NodeState lo = make_node(std::min(e1, e2), 1.0);
        NodeState hi = make_node(std::max(e1, e2), 1.0);
        const double d = 100.0 + 200.0 * uni(gen);
        CHECK(ch_threshold(hi, 3, band, params, d) >=
              ch_threshold(lo, 3, band, params, d));

        const double d1 = 100.0 + 200.0 * uni(gen);
        const double d2 = 100.0 + 200.0 * uni(gen);
        NodeState n = make_node(0.7, 1.0);
        CHECK(ch_threshold(n, 3, band, params, std::min(d1, d2)) >=
              ch_threshold(n, 3, band, params, std::max(d1, d2)));
    }
}

TEST_CASE("pdr") {
    CHECK(pdr(141, 200) == doctest::Approx(0.705));
    CHECK(pdr(200, 200) == 1.0);
    CHECK(pdr(0, 200) == 0.0);
    CHECK_THROWS_AS(pdr(1, 0), std::invalid_argument);
    CHECK_THROWS_AS(pdr(-1, 10), std::invalid_argument);
    CHECK_THROWS_AS(pdr(11, 10), std::invalid_argument);

    std::mt19937_64 gen(3);
    for (int i = 0; i < 1000; ++i) {
        const std::int64_t b = 1 + static_cast<std::int64_t>(gen() % 10000);
        const std::int64_t a = static_cast<std::int64_t>(gen() % (b + 1));
        const double r = pdr(a, b);
        CHECK(r >= 0.0);
        CHECK(r <= 1.0);
        CHECK(pdr(b, b) == 1.0);
    }
}

TEST_CASE("joules_to_mwh") {
    CHECK(joules_to_mwh(0.5) == doctest::Approx(0.1388888888888889).epsilon(1e-12));
    CHECK(joules_to_mwh(0.0) == 0.0);
    CHECK(joules_to_mwh(3.6) == doctest::Approx(1.0));
    CHECK_THROWS_AS(joules_to_mwh(-1.0), std::invalid_argument);

    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> uni(0.0, 100.0);
    for (int i = 0; i < 1000; ++i) {
        const double a = uni(gen), b = uni(gen);
        CHECK(joules_to_mwh(a + b) ==
              doctest::Approx(joules_to_mwh(a) + joules_to_mwh(b)).epsilon(1e-12));
    }
}

TEST_CASE("distance") {
    CHECK(distance({0, 0}, {3, 4}) == doctest::Approx(5.0));
    CHECK(distance({17.5, -2.25}, {17.5, -2.25}) == 0.0);
    // corner-to-sink span of the default field, frozen from the hypot oracle
    const double want = std::hypot(1000.0 - 50.0, 1000.0 - 75.0);
    CHECK(want == doctest::Approx(1325.9430606176).epsilon(1e-9));
    CHECK(distance({50, 75}, {1000, 1000}) == doctest::Approx(want));

    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> uni(-500.0, 500.0);
    for (int i = 0; i < 1000; ++i) {
        Position a{uni(gen), uni(gen)}, b{uni(gen), uni(gen)};
        CHECK(distance(a, b) == doctest::Approx(distance(b, a)));
        CHECK(distance(a, b) >= 0.0);
    }
}

TEST_CASE("z window") {
    CHECK(z_window_rounds(0.05) == 20);
    CHECK(z_window_rounds(0.3) == 4);
    CHECK_THROWS_AS(z_window_rounds(0.0), std::invalid_argument);
}
