#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "kronriver/engine.hpp"
#include "kronriver/errors.hpp"
#include "kronriver/kron.hpp"
#include "kronriver/sparsify.hpp"

namespace kronriver {

/// Strategy-gradient provider: y = A x2 for player 1, x = A^T x1 for
/// player 2's side. Implementations differ in how A is applied.
class GradientEngine {
public:
    virtual ~GradientEngine() = default;
    virtual Vec Ax(const Vec& x2) const = 0;
    virtual Vec ATx(const Vec& x1) const = 0;
    virtual std::int64_t flops() const { return 0; }
};

/// Gradients through the four-step factored product.
class FactoredEngine : public GradientEngine {
public:
    explicit FactoredEngine(const Sparsification& s) : s_(&s) {}
    Vec Ax(const Vec& x2) const override { return matvec(*s_, x2, ws_); }
    Vec ATx(const Vec& x1) const override { return matvecTranspose(*s_, x1, ws_); }
    std::int64_t flops() const override { return ws_.totalFlops; }

private:
    const Sparsification* s_;
    mutable GradientWorkspace ws_;
};

/// Gradients through an explicit dense matrix (reference/testing).
class DenseEngine : public GradientEngine {
public:
    explicit DenseEngine(DenseMat A) : A_(std::move(A)) {}
    Vec Ax(const Vec& x2) const override { return A_ * x2; }
    Vec ATx(const Vec& x1) const override { return A_.transpose() * x1; }

private:
    DenseMat A_;
};

/// Gradients straight from the block formula, bypassing the
/// decomposition; also used to spot-check a factored engine.
class ReferenceEngine : public GradientEngine {
public:
    explicit ReferenceEngine(const KronPayoff& kp) : kp_(&kp) {}
    Vec Ax(const Vec& x2) const override { return referenceMatvec(*kp_, x2); }
    Vec ATx(const Vec& x1) const override { return referenceMatvecT(*kp_, x1); }

private:
    const KronPayoff* kp_;
};

/// Wraps a factored engine and periodically replays the same vector
/// through the block formula; a disagreement aborts the run.
class SelfCheckEngine : public GradientEngine {
public:
    SelfCheckEngine(const KronPayoff& kp, const Sparsification& s, double tol = 1e-8,
                    int every = 500)
        : fast_(s), slow_(kp), tol_(tol), every_(every) {}

    Vec Ax(const Vec& x2) const override {
        Vec y = fast_.Ax(x2);
        if (calls_++ % every_ == 0) compare(y, slow_.Ax(x2));
        return y;
    }
    Vec ATx(const Vec& x1) const override {
        Vec y = fast_.ATx(x1);
        if (calls_++ % every_ == 0) compare(y, slow_.ATx(x1));
        return y;
    }
    std::int64_t flops() const override { return fast_.flops(); }

private:
    void compare(const Vec& got, const Vec& expect) const {
        double err = (got - expect).cwiseAbs().maxCoeff();
        double scale = 1 + expect.cwiseAbs().maxCoeff();
        if (err > tol_ * scale)
            throw ContractError("factored gradient deviates from the block formula by " +
                                std::to_string(err));
    }

    FactoredEngine fast_;
    ReferenceEngine slow_;
    double tol_;
    int every_;
    mutable std::int64_t calls_ = 0;
};

struct DcfrParams {
    double alpha = 1.5;
    double beta = 0.0;
    double gamma = 2.0;
    int maxIters = 1000;
    double targetExploitability = 0.0;  ///< normalized; 0 runs the full budget
    int checkpointEvery = 50;
    int threads = 1;
};

struct TracePoint {
    int iteration = 0;
    double seconds = 0;
    double exploitability = 0;
};

struct ConvergenceTrace {
    std::vector<TracePoint> points;
};

inline void writeTrace(const std::string& path, const ConvergenceTrace& trace) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "iteration,seconds,exploitability\n";
    char buf[96];
    for (const TracePoint& p : trace.points) {
        std::snprintf(buf, sizeof(buf), "%d,%.6f,%.12g\n", p.iteration, p.seconds,
                      p.exploitability);
        out << buf;
    }
}

struct DcfrResult {
    Vec avg1;  ///< average sequence-form strategy of player 1
    Vec avg2;
    int iterations = 0;
    double exploitability = 0;  ///< normalized, at the last checkpoint
    ConvergenceTrace trace;
    std::int64_t gradientFlops = 0;
};

namespace detail {

/// Per-player regret state addressed by (hand, sequence).
struct RegretTable {
    int player = 0;
    int n = 0;
    int handCount = 0;
    std::vector<double> regret;  // handCount * n
    std::vector<double> avg;     // accumulated sequence mass

    void init(int player_, int n_, int hands_) {
        player = player_;
        n = n_;
        handCount = hands_;
        regret.assign(static_cast<size_t>(n) * handCount, 0.0);
        avg.assign(static_cast<size_t>(n) * handCount, 0.0);
    }
};

/// Behavioral probabilities at one information set under regret
/// matching: positive regrets proportionally, otherwise uniform over
/// the regret argmax. Branch and tie decisions use a relative
/// tolerance so that last-bit perturbations of the gradient cannot
/// flip them; exact ties land in the same branch either way.
inline void regretMatch(const double* regrets, const std::vector<SkeletonAction>& actions,
                        int handOffset, double* probs) {
    size_t count = actions.size();
    double best = regrets[handOffset + actions[0].seq - 1];
    double maxAbs = std::abs(best);
    for (size_t a = 1; a < count; ++a) {
        double r = regrets[handOffset + actions[a].seq - 1];
        best = std::max(best, r);
        maxAbs = std::max(maxAbs, std::abs(r));
    }
    double tol = 1e-9 * (1 + maxAbs);
    if (best > tol) {
        double sumPos = 0;
        for (size_t a = 0; a < count; ++a) {
            double r = regrets[handOffset + actions[a].seq - 1];
            if (r > 0) sumPos += r;
        }
        for (size_t a = 0; a < count; ++a) {
            double r = regrets[handOffset + actions[a].seq - 1];
            probs[a] = r > 0 ? r / sumPos : 0.0;
        }
        return;
    }
    int ties = 0;
    for (size_t a = 0; a < count; ++a)
        if (regrets[handOffset + actions[a].seq - 1] >= best - tol) ++ties;
    for (size_t a = 0; a < count; ++a)
        probs[a] = regrets[handOffset + actions[a].seq - 1] >= best - tol ? 1.0 / ties : 0.0;
}

/// Current sequence-form strategy of one player, all hands stacked.
inline Vec sequenceForm(const Skeleton& sk, const RegretTable& rt) {
    Vec x = Vec::Zero(static_cast<Eigen::Index>(rt.handCount) * rt.n);
    const auto& nodes = sk.playerNodes[static_cast<size_t>(rt.player)];
    std::vector<double> reach(static_cast<size_t>(rt.n) + 1);
    std::vector<double> probs;
    for (int h = 0; h < rt.handCount; ++h) {
        int off = h * rt.n;
        reach[0] = 1.0;
        for (int idx : nodes) {
            const SkeletonNode& v = sk.nodes[static_cast<size_t>(idx)];
            double mass = reach[static_cast<size_t>(v.parentSeq(rt.player))];
            probs.resize(v.actions.size());
            regretMatch(rt.regret.data(), v.actions, off, probs.data());
            for (size_t a = 0; a < v.actions.size(); ++a) {
                double m = mass * probs[a];
                reach[static_cast<size_t>(v.actions[a].seq)] = m;
                x(off + v.actions[a].seq - 1) = m;
            }
        }
    }
    return x;
}

/// One regret-update sweep for `rt.player` against gradient g; the walk
/// runs hands independently (parallelized by disjoint hand ranges).
inline void cfrSweep(const Skeleton& sk, RegretTable& rt, const Vec& g, int threads) {
    const auto& nodes = sk.playerNodes[static_cast<size_t>(rt.player)];
    auto work = [&](int h0, int h1) {
        std::vector<double> seqVal(static_cast<size_t>(rt.n) + 1);
        std::vector<double> probs;
        for (int h = h0; h < h1; ++h) {
            int off = h * rt.n;
            std::fill(seqVal.begin(), seqVal.end(), 0.0);
            for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
                const SkeletonNode& v = sk.nodes[static_cast<size_t>(*it)];
                probs.resize(v.actions.size());
                regretMatch(rt.regret.data(), v.actions, off, probs.data());
                double nodeVal = 0;
                for (size_t a = 0; a < v.actions.size(); ++a) {
                    int seq = v.actions[a].seq;
                    double ev = g(off + seq - 1) + seqVal[static_cast<size_t>(seq)];
                    seqVal[static_cast<size_t>(seq)] = ev;  // reuse slot as the action value
                    nodeVal += probs[a] * ev;
                }
                for (const auto& act : v.actions)
                    rt.regret[static_cast<size_t>(off + act.seq - 1)] +=
                        seqVal[static_cast<size_t>(act.seq)] - nodeVal;
                seqVal[static_cast<size_t>(v.parentSeq(rt.player))] += nodeVal;
            }
        }
    };
    if (threads <= 1 || rt.handCount < 2 * threads) {
        work(0, rt.handCount);
        return;
    }
    std::vector<std::thread> pool;
    int chunk = (rt.handCount + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        int h0 = t * chunk, h1 = std::min(rt.handCount, h0 + chunk);
        if (h0 >= h1) break;
        pool.emplace_back(work, h0, h1);
    }
    for (auto& th : pool) th.join();
}

inline void discount(RegretTable& rt, double posFactor, double negFactor) {
    for (double& r : rt.regret) r *= r > 0 ? posFactor : negFactor;
}

inline void validateSequenceStrategy(const Skeleton& sk, int player, int handCount,
                                     const Vec& x, double tol = 1e-9) {
    int n = sk.sequences(player);
    if (x.size() != static_cast<Eigen::Index>(handCount) * n)
        throw InvalidInputError("strategy vector has size " + std::to_string(x.size()) +
                                ", expected " + std::to_string(handCount * n));
    if (x.size() > 0 && x.minCoeff() < -tol)
        throw InvalidInputError("strategy vector has negative entries");
    for (int h = 0; h < handCount; ++h) {
        int off = h * n;
        for (int idx : sk.playerNodes[static_cast<size_t>(player)]) {
            const SkeletonNode& v = sk.nodes[static_cast<size_t>(idx)];
            int p = v.parentSeq(player);
            double parentMass = p == 0 ? 1.0 : x(off + p - 1);
            double sum = 0;
            for (const auto& a : v.actions) sum += x(off + a.seq - 1);
            if (std::abs(sum - parentMass) > tol * (1 + std::abs(parentMass)))
                throw InvalidInputError("strategy violates flow conservation at a node");
        }
    }
}

} // namespace detail

/// Value of the best response for `player` against the opponent's
/// sequence-form strategy, computed by a bottom-up max walk per hand.
inline double bestResponseValue(const KronPayoff& kp, const GradientEngine& eng, int player,
                                const Vec& oppStrategy) {
    if (player != 0 && player != 1) throw InvalidInputError("player must be 0 or 1");
    const Skeleton& sk = kp.skeleton;
    int opp = 1 - player;
    detail::validateSequenceStrategy(sk, opp, kp.handCount(opp), oppStrategy);

    Vec g = player == 0 ? eng.Ax(oppStrategy) : Vec(-eng.ATx(oppStrategy));
    int n = player == 0 ? kp.n1 : kp.n2;
    const auto& nodes = sk.playerNodes[static_cast<size_t>(player)];
    double total = 0;
    std::vector<double> seqVal(static_cast<size_t>(n) + 1);
    for (int h = 0; h < kp.handCount(player); ++h) {
        int off = h * n;
        std::fill(seqVal.begin(), seqVal.end(), 0.0);
        for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
            const SkeletonNode& v = sk.nodes[static_cast<size_t>(*it)];
            double best = 0;
            bool first = true;
            for (const auto& a : v.actions) {
                double ev = g(off + a.seq - 1) + seqVal[static_cast<size_t>(a.seq)];
                if (first || ev > best) best = ev;
                first = false;
            }
            seqVal[static_cast<size_t>(v.parentSeq(player))] += best;
        }
        total += seqVal[0];
    }
    return total;
}

/// Average normalized exploitability of a profile: how much each side
/// concedes to a best response, in fractions of the starting pot.
inline double exploitability(const KronPayoff& kp, const GradientEngine& eng, const Vec& x1,
                             const Vec& x2) {
    double br1 = bestResponseValue(kp, eng, 0, x2);
    double br2 = bestResponseValue(kp, eng, 1, x1);
    double pot = 2 * kp.skeleton.config.potContribution;
    return (br1 + br2) / 2 / pot;
}

/// Sequence form of the uniform behavioral profile for one player.
inline Vec uniformStrategy(const KronPayoff& kp, int player) {
    detail::RegretTable rt;
    rt.init(player, player == 0 ? kp.n1 : kp.n2, kp.handCount(player));
    return detail::sequenceForm(kp.skeleton, rt);
}

/// Discounted counterfactual regret minimization with alternating
/// updates. Checkpoints the average profile's exploitability and stops
/// early once the target is met.
inline DcfrResult dcfrSolve(const KronPayoff& kp, const GradientEngine& eng,
                            const DcfrParams& params) {
    if (params.maxIters < 1) throw InvalidInputError("iteration budget must be positive");
    if (params.checkpointEvery < 1) throw InvalidInputError("checkpoint period must be positive");
    const Skeleton& sk = kp.skeleton;
    detail::RegretTable rt1, rt2;
    rt1.init(0, kp.n1, kp.handCount(0));
    rt2.init(1, kp.n2, kp.handCount(1));

    Eigen::Map<Vec> avg1(rt1.avg.data(), static_cast<Eigen::Index>(rt1.avg.size()));
    Eigen::Map<Vec> avg2(rt2.avg.data(), static_cast<Eigen::Index>(rt2.avg.size()));
    double weightSum = 0;

    DcfrResult res;
    std::int64_t flops0 = eng.flops();
    auto t0 = std::chrono::steady_clock::now();
    auto seconds = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    Vec x1 = detail::sequenceForm(sk, rt1);
    Vec x2 = detail::sequenceForm(sk, rt2);
    for (int t = 1; t <= params.maxIters; ++t) {
        Vec g1 = eng.Ax(x2);
        detail::cfrSweep(sk, rt1, g1, params.threads);
        x1 = detail::sequenceForm(sk, rt1);

        Vec g2 = -eng.ATx(x1);
        detail::cfrSweep(sk, rt2, g2, params.threads);
        x2 = detail::sequenceForm(sk, rt2);

        double ta = std::pow(static_cast<double>(t), params.alpha);
        double tb = std::pow(static_cast<double>(t), params.beta);
        double posFactor = ta / (ta + 1);
        double negFactor = tb / (tb + 1);
        detail::discount(rt1, posFactor, negFactor);
        detail::discount(rt2, posFactor, negFactor);

        double shrink = std::pow(static_cast<double>(t) / (t + 1), params.gamma);
        avg1 += x1;
        avg2 += x2;
        weightSum += 1;
        avg1 *= shrink;
        avg2 *= shrink;
        weightSum *= shrink;

        if (t % params.checkpointEvery == 0 || t == params.maxIters) {
            Vec a1 = avg1 / weightSum;
            Vec a2 = avg2 / weightSum;
            double expl = exploitability(kp, eng, a1, a2);
            res.trace.points.push_back({t, seconds(), expl});
            res.iterations = t;
            res.exploitability = expl;
            if (params.targetExploitability > 0 && expl <= params.targetExploitability) break;
        }
    }

    res.avg1 = avg1 / weightSum;
    res.avg2 = avg2 / weightSum;
    res.gradientFlops = eng.flops() - flops0;
    return res;
}

inline DcfrResult dcfrSolve(const KronPayoff& kp, const Sparsification& s,
                            const DcfrParams& params, bool selfCheck = false) {
    if (selfCheck) {
        SelfCheckEngine eng(kp, s);
        return dcfrSolve(kp, eng, params);
    }
    FactoredEngine eng(s);
    return dcfrSolve(kp, eng, params);
}

struct DeterministicOptimum {
    double value = 0;        ///< what the best pure strategy guarantees
    Vec strategy;            ///< its sequence form
    std::vector<int> choices;  ///< chosen action index per (hand, node)
};

/// Exhaustive search over pure strategies of `player`: every
/// combination of one action per (hand, decision node), each scored by
/// the opponent's exact best response. Throws once the combination
/// count passes the guard.
inline DeterministicOptimum enumerateDeterministicOptimum(const KronPayoff& kp,
                                                          const GradientEngine& eng, int player,
                                                          double guard = 1e6) {
    if (player != 0 && player != 1) throw InvalidInputError("player must be 0 or 1");
    const Skeleton& sk = kp.skeleton;
    const auto& nodes = sk.playerNodes[static_cast<size_t>(player)];
    int handCount = kp.handCount(player);
    int n = player == 0 ? kp.n1 : kp.n2;

    double combos = 1;
    std::vector<int> radix;
    for (int h = 0; h < handCount; ++h)
        for (int idx : nodes) {
            radix.push_back(static_cast<int>(sk.nodes[static_cast<size_t>(idx)].actions.size()));
            combos *= radix.back();
            if (combos > guard)
                throw GuardError("pure strategy space exceeds the enumeration guard of " +
                                 std::to_string(static_cast<std::int64_t>(guard)));
        }

    std::vector<int> choice(radix.size(), 0);
    DeterministicOptimum best;
    bool haveBest = false;
    std::vector<double> reach(static_cast<size_t>(n) + 1);

    while (true) {
        Vec x = Vec::Zero(static_cast<Eigen::Index>(handCount) * n);
        size_t slot = 0;
        for (int h = 0; h < handCount; ++h) {
            int off = h * n;
            reach.assign(reach.size(), 0.0);
            reach[0] = 1.0;
            for (int idx : nodes) {
                const SkeletonNode& v = sk.nodes[static_cast<size_t>(idx)];
                double mass = reach[static_cast<size_t>(v.parentSeq(player))];
                int pick = choice[slot++];
                for (size_t a = 0; a < v.actions.size(); ++a) {
                    double m = static_cast<int>(a) == pick ? mass : 0.0;
                    reach[static_cast<size_t>(v.actions[a].seq)] = m;
                    if (m != 0.0) x(off + v.actions[a].seq - 1) = m;
                }
            }
        }
        double value = -bestResponseValue(kp, eng, 1 - player, x);
        if (!haveBest || value > best.value) {
            best.value = value;
            best.strategy = x;
            best.choices = choice;
            haveBest = true;
        }
        size_t d = 0;
        while (d < choice.size() && ++choice[d] == radix[d]) choice[d++] = 0;
        if (d == choice.size()) break;
    }
    return best;
}

/// Gap between a mixed strategy's guaranteed value and the best pure
/// strategy's, measured in pots.
inline double priceOfDeterminism(double mixedValue, double deterministicValue, double pot) {
    if (!(pot > 0)) throw InvalidInputError("pot must be positive");
    return (mixedValue - deterministicValue) / pot;
}

} // namespace kronriver
