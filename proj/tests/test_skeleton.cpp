#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "kronriver/skeleton.hpp"

using namespace kronriver;

namespace {

/// Stack/pot/menu setup whose full tree is verified against hand-computed
/// contributions: 0.75-pot menus everywhere, 1875 already in from each
/// player, 18125 behind.
BettingConfig referenceConfig() {
    BettingConfig cfg;
    cfg.stack1 = 18125;
    cfg.stack2 = 18125;
    cfg.potContribution = 1875;
    for (auto& m : cfg.menu1) m = {0.75};
    for (auto& m : cfg.menu2) m = {0.75};
    cfg.allIn = true;
    return cfg;
}

std::vector<std::pair<double, double>> sortedContribs(const Skeleton& sk) {
    std::vector<std::pair<double, double>> qs;
    for (const auto& t : sk.terminals) qs.emplace_back(t.q1, t.q2);
    std::sort(qs.begin(), qs.end());
    return qs;
}

const SkeletonNode* findNode(const Skeleton& sk, double c1, double c2) {
    for (const auto& n : sk.nodes)
        if (std::abs(n.contrib1 - c1) < 1e-6 && std::abs(n.contrib2 - c2) < 1e-6) return &n;
    return nullptr;
}

} // namespace

TEST_CASE("reference tree matches hand-computed contributions", "[skeleton]") {
    Skeleton sk = buildSkeleton(referenceConfig());

    REQUIRE(sk.nodes.size() == 12);
    REQUIRE(sk.decisionNodes(0) == 6);
    REQUIRE(sk.decisionNodes(1) == 6);
    REQUIRE(sk.sequences(0) == 16);
    REQUIRE(sk.sequences(1) == 16);
    REQUIRE(sk.terminals.size() == 21);

    int folds = 0, showdowns = 0;
    for (const auto& t : sk.terminals)
        (t.kind == SkeletonTerminal::Fold ? folds : showdowns)++;
    REQUIRE(folds == 10);
    REQUIRE(showdowns == 11);

    std::vector<std::pair<double, double>> expected = {
        {1875, 1875},        {1875, 4687.5},     {1875, 20000},
        {4687.5, 1875},      {4687.5, 4687.5},   {4687.5, 4687.5},
        {4687.5, 11718.75},  {4687.5, 20000},    {11718.75, 4687.5},
        {11718.75, 11718.75},{11718.75, 11718.75},{11718.75, 20000},
        {20000, 1875},       {20000, 4687.5},    {20000, 11718.75},
        {20000, 20000},      {20000, 20000},     {20000, 20000},
        {20000, 20000},      {20000, 20000},     {20000, 20000},
    };
    auto got = sortedContribs(sk);
    REQUIRE(got.size() == expected.size());
    for (size_t i = 0; i < got.size(); ++i) {
        REQUIRE(got[i].first == Catch::Approx(expected[i].first).margin(0.05));
        REQUIRE(got[i].second == Catch::Approx(expected[i].second).margin(0.05));
    }
}

TEST_CASE("reference tree wires sequences depth first", "[skeleton]") {
    Skeleton sk = buildSkeleton(referenceConfig());

    const SkeletonNode& root = sk.nodes[0];
    REQUIRE(root.player == 0);
    REQUIRE(root.context == BetContext::FirstAction);
    REQUIRE(root.actions.size() == 3);
    REQUIRE(root.actions[0].kind == SkeletonAction::Check);
    REQUIRE(root.actions[1].kind == SkeletonAction::Bet);
    REQUIRE(root.actions[1].target == Catch::Approx(4687.5));
    REQUIRE(root.actions[2].kind == SkeletonAction::AllIn);
    REQUIRE(root.actions[2].target == Catch::Approx(20000));

    // check-check showdown carries both players' first sequences
    const SkeletonTerminal& t0 = sk.terminals[0];
    REQUIRE(t0.kind == SkeletonTerminal::Showdown);
    REQUIRE(t0.seq1 == 1);
    REQUIRE(t0.seq2 == 1);
    REQUIRE(t0.path == "k/k");

    // player 2 folding to the preflop-style open shove
    const SkeletonTerminal& shoveFold = sk.terminals[19];
    REQUIRE(shoveFold.kind == SkeletonTerminal::Fold);
    REQUIRE(shoveFold.folder == 1);
    REQUIRE(shoveFold.q1 == Catch::Approx(20000));
    REQUIRE(shoveFold.q2 == Catch::Approx(1875));
    REQUIRE(shoveFold.seq1 == 3);
    REQUIRE(shoveFold.seq2 == 15);
    REQUIRE(shoveFold.path == "a/f");

    // a raise past the effective stack clamps to all-in and merges with
    // the explicit all-in action
    const SkeletonNode* i = findNode(sk, 4687.5, 11718.75);
    REQUIRE(i != nullptr);
    REQUIRE(i->player == 0);
    REQUIRE(i->context == BetContext::AfterOneRaise);
    REQUIRE(i->actions.size() == 3);
    REQUIRE(i->actions[2].kind == SkeletonAction::AllIn);
    REQUIRE(i->actions[2].target == Catch::Approx(20000));

    const SkeletonNode* h = findNode(sk, 4687.5, 1875);
    REQUIRE(h != nullptr);
    REQUIRE(h->player == 1);
    REQUIRE(h->context == BetContext::FacingBet);
    REQUIRE(h->actions.size() == 4);
    REQUIRE(h->actions[2].kind == SkeletonAction::Raise);
    REQUIRE(h->actions[2].target == Catch::Approx(11718.75));

    // no node keeps two aggressive actions with the same target
    for (const auto& n : sk.nodes)
        for (size_t a = 0; a < n.actions.size(); ++a)
            for (size_t b = a + 1; b < n.actions.size(); ++b)
                if (n.actions[a].kind != SkeletonAction::Fold &&
                    n.actions[b].kind != SkeletonAction::Fold)
                    REQUIRE(std::abs(n.actions[a].target - n.actions[b].target) > 1e-6);

    // sequence parents follow the path structure
    REQUIRE(sk.seqParent[0][1] == 0);
    REQUIRE(sk.seqParent[0][4] == 1);  // fold after check comes under the check
    REQUIRE(sk.seqParent[1][4] == 2);  // raise branch under the 0.75 bet
}

TEST_CASE("payoff components split folds and showdowns", "[skeleton]") {
    Skeleton sk = buildSkeleton(referenceConfig());
    PayoffComponents pc = payoffComponents(sk);

    REQUIRE(pc.F.rows() == 16);
    REQUIRE(pc.F.cols() == 16);
    REQUIRE(pc.F.nonZeros() == 10);
    REQUIRE(pc.S.nonZeros() == 11);

    std::vector<double> fvals, svals;
    for (int k = 0; k < pc.F.outerSize(); ++k)
        for (SpMatR::InnerIterator it(pc.F, k); it; ++it) {
            fvals.push_back(it.value());
            REQUIRE(pc.S.coeff(it.row(), it.col()) == 0.0);
        }
    for (int k = 0; k < pc.S.outerSize(); ++k)
        for (SpMatR::InnerIterator it(pc.S, k); it; ++it) svals.push_back(it.value());
    std::sort(fvals.begin(), fvals.end());
    std::sort(svals.begin(), svals.end());

    std::vector<double> expectedF = {-11718.75, -4687.5, -4687.5, -1875, -1875,
                                     1875,      1875,    4687.5,  4687.5, 11718.75};
    std::vector<double> expectedS = {1875,  4687.5, 4687.5, 11718.75, 11718.75, 20000,
                                     20000, 20000,  20000,  20000,    20000};
    REQUIRE(fvals.size() == expectedF.size());
    REQUIRE(svals.size() == expectedS.size());
    for (size_t k = 0; k < fvals.size(); ++k)
        REQUIRE(fvals[k] == Catch::Approx(expectedF[k]).margin(1e-9));
    for (size_t k = 0; k < svals.size(); ++k)
        REQUIRE(svals[k] == Catch::Approx(expectedS[k]).margin(1e-9));

    // the open-shove fold pays player 1 the 1875 behind it
    REQUIRE(pc.F.coeff(2, 14) == Catch::Approx(1875));
    // check-check showdown has the starting pot at stake
    REQUIRE(pc.S.coeff(0, 0) == Catch::Approx(1875));
}

TEST_CASE("menus are picked per context and raise cap limits aggression", "[skeleton]") {
    BettingConfig cfg;
    cfg.stack1 = 1e6;
    cfg.stack2 = 1e6;
    cfg.potContribution = 100;
    cfg.menu1[0] = {0.5, 1.0};  // first action
    cfg.menu1[3] = {2.0};       // after one raise
    cfg.menu2[2] = {1.0};       // facing bet
    cfg.allIn = false;
    cfg.raiseCap = 3;
    Skeleton sk = buildSkeleton(cfg);

    const SkeletonNode& root = sk.nodes[0];
    REQUIRE(root.actions.size() == 3);
    REQUIRE(root.actions[1].target == Catch::Approx(200));   // 100 + 0.5*200
    REQUIRE(root.actions[2].target == Catch::Approx(300));   // 100 + 1.0*200

    const SkeletonNode* vsHalf = findNode(sk, 200, 100);
    REQUIRE(vsHalf != nullptr);
    REQUIRE(vsHalf->context == BetContext::FacingBet);
    REQUIRE(vsHalf->actions.size() == 3);
    REQUIRE(vsHalf->actions[2].kind == SkeletonAction::Raise);
    REQUIRE(vsHalf->actions[2].target == Catch::Approx(600));  // 200 + 1.0*400

    const SkeletonNode* afterRaise = findNode(sk, 200, 600);
    REQUIRE(afterRaise != nullptr);
    REQUIRE(afterRaise->context == BetContext::AfterOneRaise);
    REQUIRE(afterRaise->actions.size() == 3);
    REQUIRE(afterRaise->actions[2].target == Catch::Approx(3000));  // 600 + 2.0*1200

    // three aggressive actions exhaust the cap: only fold/call remain
    const SkeletonNode* capped = findNode(sk, 3000, 600);
    REQUIRE(capped != nullptr);
    REQUIRE(capped->actions.size() == 2);
    REQUIRE(capped->actions[0].kind == SkeletonAction::Fold);
    REQUIRE(capped->actions[1].kind == SkeletonAction::Call);

    for (const auto& n : sk.nodes)
        for (const auto& a : n.actions) REQUIRE(a.kind != SkeletonAction::AllIn);
}

TEST_CASE("degenerate menus still produce a playable tree", "[skeleton]") {
    BettingConfig cfg;
    cfg.stack1 = 50;
    cfg.stack2 = 50;
    cfg.potContribution = 10;
    cfg.allIn = false;
    Skeleton sk = buildSkeleton(cfg);
    // nobody can bet: check it through to the showdown
    REQUIRE(sk.nodes.size() == 2);
    REQUIRE(sk.terminals.size() == 1);
    REQUIRE(sk.terminals[0].kind == SkeletonTerminal::Showdown);
    REQUIRE(sk.sequences(0) == 1);
    REQUIRE(sk.sequences(1) == 1);
}

TEST_CASE("config validation rejects bad numbers", "[skeleton]") {
    BettingConfig cfg = referenceConfig();
    cfg.stack1 = -1;
    REQUIRE_THROWS_AS(buildSkeleton(cfg), InvalidInputError);
    cfg = referenceConfig();
    cfg.potContribution = 0;
    REQUIRE_THROWS_AS(buildSkeleton(cfg), InvalidInputError);
    cfg = referenceConfig();
    cfg.menu1[0] = {0.5, -0.25};
    REQUIRE_THROWS_AS(buildSkeleton(cfg), InvalidInputError);
}

TEST_CASE("sequence constraints tie actions to their parent", "[skeleton]") {
    Skeleton sk = buildSkeleton(referenceConfig());
    int handCount = 3;
    SequenceConstraints sc = sequenceConstraints(sk, 0, handCount);
    REQUIRE(sc.F.rows() == 1 + handCount * 6);
    REQUIRE(sc.F.cols() == 1 + handCount * 16);
    REQUIRE(sc.f(0) == 1.0);
    REQUIRE(sc.f.tail(sc.f.size() - 1).cwiseAbs().maxCoeff() == 0.0);

    for (int k = 0; k < sc.F.outerSize(); ++k)
        for (SpMatR::InnerIterator it(sc.F, k); it; ++it)
            REQUIRE((it.value() == 1.0 || it.value() == -1.0));

    // a uniform behavioral strategy satisfies the system exactly
    Vec x = Vec::Zero(sc.F.cols());
    x(0) = 1.0;
    for (int h = 0; h < handCount; ++h) {
        std::vector<double> reach(static_cast<size_t>(sk.sequences(0)) + 1, 0.0);
        reach[0] = 1.0;
        for (int idx : sk.playerNodes[0]) {
            const SkeletonNode& n = sk.nodes[static_cast<size_t>(idx)];
            double mass = reach[static_cast<size_t>(n.parentSeq(0))];
            for (const auto& a : n.actions) {
                reach[static_cast<size_t>(a.seq)] = mass / static_cast<double>(n.actions.size());
                x(1 + h * sk.sequences(0) + a.seq - 1) =
                    reach[static_cast<size_t>(a.seq)];
            }
        }
    }
    Vec resid = sc.F * x - sc.f;
    REQUIRE(resid.cwiseAbs().maxCoeff() < 1e-12);

    SequenceConstraints sc2 = sequenceConstraints(sk, 1, 2);
    REQUIRE(sc2.F.rows() == 1 + 2 * 6);
    REQUIRE(sc2.F.cols() == 1 + 2 * 16);
}
