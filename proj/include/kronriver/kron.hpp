#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "kronriver/cards.hpp"
#include "kronriver/errors.hpp"
#include "kronriver/linalg.hpp"
#include "kronriver/skeleton.hpp"

namespace kronriver {

/// A river endgame: the public board, each player's possible holdings
/// with belief weights, and the betting structure. Hands are stored
/// sorted by showdown strength (weakest first), beliefs aligned.
struct RiverInstance {
    Board board;
    std::array<std::vector<Hand>, 2> hands{};
    std::array<std::vector<double>, 2> beliefs{};
    BettingConfig config;
    Deck deck = Deck::standard52();

    int handCount(int player) const {
        return static_cast<int>(hands[static_cast<size_t>(player)].size());
    }

    friend bool operator==(const RiverInstance& a, const RiverInstance& b) {
        return a.board == b.board && a.hands == b.hands && a.beliefs == b.beliefs &&
               a.config.stack1 == b.config.stack1 && a.config.stack2 == b.config.stack2 &&
               a.config.potContribution == b.config.potContribution &&
               a.config.menu1 == b.config.menu1 && a.config.menu2 == b.config.menu2 &&
               a.config.allIn == b.config.allIn && a.config.raiseCap == b.config.raiseCap &&
               a.deck.cards == b.deck.cards;
    }
};

inline RiverInstance makeRiverInstance(const Board& board, std::vector<Hand> hands1,
                                       std::vector<double> beliefs1, std::vector<Hand> hands2,
                                       std::vector<double> beliefs2, const BettingConfig& config,
                                       Deck deck = Deck::standard52()) {
    config.validate();
    deck.validate();
    for (const Card& c : board.cards())
        if (!deck.contains(c))
            throw InvalidInputError("board card " + c.code() + " not in the deck");

    RiverInstance inst;
    inst.board = board;
    inst.config = config;
    inst.deck = std::move(deck);
    std::array<std::vector<Hand>*, 2> hs = {&hands1, &hands2};
    std::array<std::vector<double>*, 2> bs = {&beliefs1, &beliefs2};
    for (int p = 0; p < 2; ++p) {
        auto& hands = *hs[static_cast<size_t>(p)];
        auto& weights = *bs[static_cast<size_t>(p)];
        if (hands.empty())
            throw InvalidInputError("player " + std::to_string(p + 1) + " has no hands");
        if (hands.size() != weights.size())
            throw InvalidInputError("player " + std::to_string(p + 1) + ": " +
                                    std::to_string(hands.size()) + " hands but " +
                                    std::to_string(weights.size()) + " weights");
        for (double w : weights)
            if (!(w >= 0) || !std::isfinite(w))
                throw InvalidInputError("belief weights must be finite and nonnegative");
        for (const Hand& h : hands) {
            if (!inst.deck.contains(h.high()) || !inst.deck.contains(h.low()))
                throw InvalidInputError("hand " + h.code() + " uses a card outside the deck");
            if (inst.board.overlaps(h))
                throw InvalidInputError("hand " + h.code() + " shares a card with the board");
        }

        // sort by showdown strength, canonical card order as tiebreak
        std::vector<size_t> order(hands.size());
        std::iota(order.begin(), order.end(), size_t{0});
        std::vector<uint32_t> strength(hands.size());
        for (size_t i = 0; i < hands.size(); ++i)
            strength[i] = evaluate7(hands[i], inst.board).key();
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            if (strength[a] != strength[b]) return strength[a] < strength[b];
            return hands[a] < hands[b];
        });
        auto& outH = inst.hands[static_cast<size_t>(p)];
        auto& outB = inst.beliefs[static_cast<size_t>(p)];
        outH.reserve(hands.size());
        outB.reserve(hands.size());
        for (size_t i : order) {
            outH.push_back(hands[i]);
            outB.push_back(weights[i]);
        }
        for (size_t i = 1; i < outH.size(); ++i)
            if (outH[i] == outH[i - 1])
                throw InvalidInputError("duplicate hand " + outH[i].code() + " for player " +
                                        std::to_string(p + 1));
    }
    return inst;
}

/// Assembled payoff data in factored form. The full game matrix is
/// never materialized here: block (i, j) of the payoff to player 1
/// equals pi(i,j) * (F + gamma_ij * S) where pi is the normalized
/// joint reach of the hand pair.
struct KronPayoff {
    Skeleton skeleton;
    SpMatR F;  ///< fold payments over sequence pairs (n1 x n2)
    SpMatR S;  ///< showdown stakes over sequence pairs (n1 x n2)
    int n1 = 0;
    int n2 = 0;
    std::array<std::vector<Hand>, 2> hands{};
    Vec mu1, mu2;          ///< raw belief weights, sorted-hand order
    double beta = 0;       ///< total compatible belief mass
    Vec lambda1, lambda2;  ///< mu / sqrt(beta)
    DenseMat W;            ///< showdown signs gamma(h1_i, h2_j)
    DenseMat Hcross;       ///< 1 where the hand pair shares a card

    int handCount(int player) const {
        return static_cast<int>(hands[static_cast<size_t>(player)].size());
    }
    Eigen::Index rows() const { return static_cast<Eigen::Index>(handCount(0)) * n1; }
    Eigen::Index cols() const { return static_cast<Eigen::Index>(handCount(1)) * n2; }

    /// Position of (hand, sequence) in the stacked strategy vector.
    Eigen::Index flat(int player, int hand, int seq) const {
        return static_cast<Eigen::Index>(hand) * (player == 0 ? n1 : n2) + (seq - 1);
    }

    /// Normalized probability that the hand pair (i, j) is dealt.
    double pi(int i, int j) const {
        return lambda1(i) * lambda2(j) * (1.0 - Hcross(i, j));
    }
};

inline KronPayoff assemble(const RiverInstance& inst) {
    KronPayoff kp;
    kp.skeleton = buildSkeleton(inst.config);
    PayoffComponents pc = payoffComponents(kp.skeleton);
    kp.F = std::move(pc.F);
    kp.S = std::move(pc.S);
    kp.n1 = kp.skeleton.sequences(0);
    kp.n2 = kp.skeleton.sequences(1);
    kp.hands = inst.hands;

    int m1 = inst.handCount(0), m2 = inst.handCount(1);
    kp.mu1 = Eigen::Map<const Vec>(inst.beliefs[0].data(), m1);
    kp.mu2 = Eigen::Map<const Vec>(inst.beliefs[1].data(), m2);
    kp.W.resize(m1, m2);
    kp.Hcross.resize(m1, m2);
    double beta = 0;
    for (int i = 0; i < m1; ++i)
        for (int j = 0; j < m2; ++j) {
            bool ok = compatible(inst.hands[0][static_cast<size_t>(i)],
                                 inst.hands[1][static_cast<size_t>(j)], inst.board);
            kp.Hcross(i, j) = ok ? 0.0 : 1.0;
            kp.W(i, j) = ok ? gamma(inst.hands[0][static_cast<size_t>(i)],
                                    inst.hands[1][static_cast<size_t>(j)], inst.board)
                            : 0.0;
            if (ok) beta += kp.mu1(i) * kp.mu2(j);
        }
    if (!(beta > 0))
        throw DegenerateBeliefsError("no compatible hand pair carries belief mass");
    kp.beta = beta;
    kp.lambda1 = kp.mu1 / std::sqrt(beta);
    kp.lambda2 = kp.mu2 / std::sqrt(beta);
    return kp;
}

/// Materialize the full payoff matrix. Guarded: refuses matrices with
/// more than `guardEntries` cells.
inline DenseMat denseExpand(const KronPayoff& kp, double guardEntries = 5e7) {
    double cells = static_cast<double>(kp.rows()) * static_cast<double>(kp.cols());
    if (cells > guardEntries)
        throw GuardError("dense payoff would hold " + std::to_string(cells) +
                         " entries, guard is " + std::to_string(guardEntries));
    DenseMat A = DenseMat::Zero(kp.rows(), kp.cols());
    for (int i = 0; i < kp.handCount(0); ++i)
        for (int j = 0; j < kp.handCount(1); ++j) {
            double p = kp.pi(i, j);
            if (p == 0.0) continue;
            double g = kp.W(i, j);
            Eigen::Index r0 = static_cast<Eigen::Index>(i) * kp.n1;
            Eigen::Index c0 = static_cast<Eigen::Index>(j) * kp.n2;
            for (int k = 0; k < kp.F.outerSize(); ++k)
                for (SpMatR::InnerIterator it(kp.F, k); it; ++it)
                    A(r0 + it.row(), c0 + it.col()) += p * it.value();
            if (g != 0.0)
                for (int k = 0; k < kp.S.outerSize(); ++k)
                    for (SpMatR::InnerIterator it(kp.S, k); it; ++it)
                        A(r0 + it.row(), c0 + it.col()) += p * g * it.value();
        }
    return A;
}

/// Nonzero count of the full payoff matrix, without materializing it.
/// Fold and showdown supports are disjoint and every fold payment and
/// showdown stake is positive, so a reachable block contributes all of
/// nnz(F) plus, when the hands do not tie, all of nnz(S).
inline std::int64_t densePayoffNonzeros(const KronPayoff& kp) {
    std::int64_t nnzF = kp.F.nonZeros(), nnzS = kp.S.nonZeros();
    std::int64_t total = 0;
    for (int i = 0; i < kp.handCount(0); ++i)
        for (int j = 0; j < kp.handCount(1); ++j) {
            if (kp.pi(i, j) == 0.0) continue;
            total += nnzF + (kp.W(i, j) != 0.0 ? nnzS : 0);
        }
    return total;
}

/// Payoff-times-vector straight from the block formula. Quadratic in
/// the hand counts; used as a cross-check against the factored engine.
inline Vec referenceMatvec(const KronPayoff& kp, const Vec& x) {
    if (x.size() != kp.cols())
        throw InvalidInputError("matvec input has size " + std::to_string(x.size()) +
                                ", expected " + std::to_string(kp.cols()));
    int m1 = kp.handCount(0), m2 = kp.handCount(1);
    DenseMat vF(kp.n1, m2), vS(kp.n1, m2);
    for (int j = 0; j < m2; ++j) {
        Vec xb = x.segment(static_cast<Eigen::Index>(j) * kp.n2, kp.n2);
        vF.col(j) = kp.F * xb;
        vS.col(j) = kp.S * xb;
    }
    Vec y = Vec::Zero(kp.rows());
    for (int i = 0; i < m1; ++i)
        for (int j = 0; j < m2; ++j) {
            double p = kp.pi(i, j);
            if (p == 0.0) continue;
            y.segment(static_cast<Eigen::Index>(i) * kp.n1, kp.n1) +=
                p * vF.col(j) + p * kp.W(i, j) * vS.col(j);
        }
    return y;
}

/// Transposed payoff-times-vector from the block formula.
inline Vec referenceMatvecT(const KronPayoff& kp, const Vec& y) {
    if (y.size() != kp.rows())
        throw InvalidInputError("matvec input has size " + std::to_string(y.size()) +
                                ", expected " + std::to_string(kp.rows()));
    int m1 = kp.handCount(0), m2 = kp.handCount(1);
    DenseMat uF(kp.n2, m1), uS(kp.n2, m1);
    for (int i = 0; i < m1; ++i) {
        Vec yb = y.segment(static_cast<Eigen::Index>(i) * kp.n1, kp.n1);
        uF.col(i) = kp.F.transpose() * yb;
        uS.col(i) = kp.S.transpose() * yb;
    }
    Vec x = Vec::Zero(kp.cols());
    for (int j = 0; j < m2; ++j)
        for (int i = 0; i < m1; ++i) {
            double p = kp.pi(i, j);
            if (p == 0.0) continue;
            x.segment(static_cast<Eigen::Index>(j) * kp.n2, kp.n2) +=
                p * uF.col(i) + p * kp.W(i, j) * uS.col(i);
        }
    return x;
}

} // namespace kronriver
