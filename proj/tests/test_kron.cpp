#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "kronriver/kron.hpp"
#include "oracles.hpp"

using namespace kronriver;

namespace {

BettingConfig smallConfig() {
    BettingConfig cfg;
    cfg.stack1 = 95;
    cfg.stack2 = 95;
    cfg.potContribution = 5;
    for (auto& m : cfg.menu1) m = {0.5};
    for (auto& m : cfg.menu2) m = {0.5};
    cfg.allIn = true;
    cfg.raiseCap = 2;
    return cfg;
}

RiverInstance mixedInstance() {
    Board b = Board::fromCode("2c7d9hJc3s");
    std::vector<Hand> h1 = {Hand::fromCode("AsAh"), Hand::fromCode("KsKh"),
                            Hand::fromCode("QsQh"), Hand::fromCode("8c8d")};
    std::vector<double> w1 = {0.4, 0.3, 0.2, 0.1};
    std::vector<Hand> h2 = {Hand::fromCode("AdAc"), Hand::fromCode("JdJh"),
                            Hand::fromCode("TsTh"), Hand::fromCode("KdQc"),
                            Hand::fromCode("AsKd")};
    std::vector<double> w2 = {0.25, 0.3, 0.25, 0.0, 0.2};
    return makeRiverInstance(b, h1, w1, h2, w2, smallConfig());
}

} // namespace

TEST_CASE("instances sort hands by showdown strength", "[kron]") {
    RiverInstance inst = mixedInstance();
    for (int p = 0; p < 2; ++p) {
        for (size_t i = 1; i < inst.hands[static_cast<size_t>(p)].size(); ++i) {
            uint32_t a = evaluate7(inst.hands[static_cast<size_t>(p)][i - 1], inst.board).key();
            uint32_t b = evaluate7(inst.hands[static_cast<size_t>(p)][i], inst.board).key();
            REQUIRE(a <= b);
        }
    }
    // beliefs moved with their hands: the aces keep weight 0.4
    for (size_t i = 0; i < inst.hands[0].size(); ++i)
        if (inst.hands[0][i] == Hand::fromCode("AsAh"))
            REQUIRE(inst.beliefs[0][i] == 0.4);
    // weakest player-1 hand here is the eights
    REQUIRE(inst.hands[0].front() == Hand::fromCode("8c8d"));
    REQUIRE(inst.hands[0].back() == Hand::fromCode("AsAh"));
}

TEST_CASE("instance validation rejects malformed inputs", "[kron]") {
    Board b = Board::fromCode("2c7d9hJc3s");
    std::vector<Hand> ok = {Hand::fromCode("AsAh")};
    std::vector<double> w = {1.0};
    BettingConfig cfg = smallConfig();

    REQUIRE_THROWS_AS(makeRiverInstance(b, {}, {}, ok, w, cfg), InvalidInputError);
    REQUIRE_THROWS_AS(
        makeRiverInstance(b, {Hand::fromCode("2cAh")}, w, ok, w, cfg), InvalidInputError);
    REQUIRE_THROWS_AS(
        makeRiverInstance(b, {Hand::fromCode("AsAh"), Hand::fromCode("AhAs")},
                          {0.5, 0.5}, ok, w, cfg),
        InvalidInputError);
    REQUIRE_THROWS_AS(makeRiverInstance(b, ok, {0.5, 0.5}, ok, w, cfg), InvalidInputError);
    REQUIRE_THROWS_AS(makeRiverInstance(b, ok, {-1.0}, ok, w, cfg), InvalidInputError);

    Deck tiny;
    tiny.cards = {Card::fromCode("2c"), Card::fromCode("7d"), Card::fromCode("9h"),
                  Card::fromCode("Jc"), Card::fromCode("3s"), Card::fromCode("5c"),
                  Card::fromCode("5d"), Card::fromCode("6c"), Card::fromCode("6d")};
    REQUIRE_THROWS_AS(makeRiverInstance(b, ok, w, {Hand::fromCode("5c5d")}, w, cfg, tiny),
                      InvalidInputError);
}

TEST_CASE("assemble computes the factored payoff pieces", "[kron]") {
    RiverInstance inst = mixedInstance();
    KronPayoff kp = assemble(inst);

    REQUIRE(kp.handCount(0) == 4);
    REQUIRE(kp.handCount(1) == 5);
    REQUIRE(kp.n1 == kp.skeleton.sequences(0));
    REQUIRE(kp.rows() == 4 * kp.n1);
    REQUIRE(kp.cols() == 5 * kp.n2);

    double beta = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 5; ++j) {
            const Hand& a = inst.hands[0][static_cast<size_t>(i)];
            const Hand& c = inst.hands[1][static_cast<size_t>(j)];
            bool comp = !a.overlaps(c);
            REQUIRE(kp.Hcross(i, j) == (comp ? 0.0 : 1.0));
            REQUIRE(kp.W(i, j) == oracle::gamma(a, c, inst.board));
            if (comp) beta += inst.beliefs[0][static_cast<size_t>(i)] *
                              inst.beliefs[1][static_cast<size_t>(j)];
        }
    REQUIRE(kp.beta == Catch::Approx(beta).epsilon(1e-14));
    for (int i = 0; i < 4; ++i)
        REQUIRE(kp.lambda1(i) == Catch::Approx(kp.mu1(i) / std::sqrt(beta)).margin(1e-15));

    // pi recovers the normalized joint probability, zero on blockers
    double mass = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 5; ++j) mass += kp.pi(i, j);
    double compatMass = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 5; ++j)
            if (kp.Hcross(i, j) == 0.0) compatMass += kp.mu1(i) * kp.mu2(j) / beta;
    REQUIRE(mass == Catch::Approx(compatMass).epsilon(1e-13));
    REQUIRE(compatMass == Catch::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("dense expansion matches the terminal-walk oracle", "[kron]") {
    RiverInstance inst = mixedInstance();
    KronPayoff kp = assemble(inst);
    DenseMat got = denseExpand(kp);
    DenseMat expect = oracle::densePayoff(inst);
    REQUIRE(got.rows() == expect.rows());
    REQUIRE(got.cols() == expect.cols());
    double scale = expect.cwiseAbs().maxCoeff();
    REQUIRE((got - expect).cwiseAbs().maxCoeff() < 1e-12 * scale);
}

TEST_CASE("reference matvecs agree with the dense matrix", "[kron]") {
    RiverInstance inst = mixedInstance();
    KronPayoff kp = assemble(inst);
    DenseMat A = denseExpand(kp);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> d(-1, 1);
    for (int trial = 0; trial < 5; ++trial) {
        Vec x(kp.cols()), y(kp.rows());
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = d(rng);
        for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = d(rng);
        Vec got = referenceMatvec(kp, x);
        Vec expect = A * x;
        REQUIRE((got - expect).cwiseAbs().maxCoeff() <
                1e-12 * (1 + expect.cwiseAbs().maxCoeff()));
        Vec gotT = referenceMatvecT(kp, y);
        Vec expectT = A.transpose() * y;
        REQUIRE((gotT - expectT).cwiseAbs().maxCoeff() <
                1e-12 * (1 + expectT.cwiseAbs().maxCoeff()));
    }
    REQUIRE_THROWS_AS(referenceMatvec(kp, Vec::Zero(3)), InvalidInputError);
}

TEST_CASE("degenerate beliefs are refused", "[kron]") {
    Board b = Board::fromCode("2c7d9hJc3s");
    BettingConfig cfg = smallConfig();
    // the only pair shares an ace: no compatible mass at all
    RiverInstance blocked = makeRiverInstance(b, {Hand::fromCode("AsAh")}, {1.0},
                                              {Hand::fromCode("AsKd")}, {1.0}, cfg);
    REQUIRE_THROWS_AS(assemble(blocked), DegenerateBeliefsError);

    // compatible pair exists but all its weight is zero
    RiverInstance zeroed = makeRiverInstance(b, {Hand::fromCode("AsAh")}, {0.0},
                                             {Hand::fromCode("KdKc")}, {1.0}, cfg);
    REQUIRE_THROWS_AS(assemble(zeroed), DegenerateBeliefsError);

    try {
        assemble(blocked);
    } catch (const Error& e) {
        REQUIRE(e.code() == "DEGENERATE_BELIEFS");
    }
}

TEST_CASE("dense expansion honors its guard", "[kron]") {
    RiverInstance inst = mixedInstance();
    KronPayoff kp = assemble(inst);
    REQUIRE_THROWS_AS(denseExpand(kp, 10.0), GuardError);
}
