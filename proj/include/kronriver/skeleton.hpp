#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "kronriver/errors.hpp"
#include "kronriver/linalg.hpp"

namespace kronriver {

/// Money comparisons (dedup of clamped bet targets, all-in detection)
/// use this absolute tolerance.
inline constexpr double kMoneyTol = 1e-6;

/// What the acting player is looking at when choosing a bet size.
enum class BetContext : int {
    FirstAction = 0,
    FacingCheck = 1,
    FacingBet = 2,
    AfterOneRaise = 3,
    AfterMultipleRaises = 4,
};
inline constexpr int kBetContexts = 5;

inline const char* betContextName(BetContext c) {
    switch (c) {
        case BetContext::FirstAction: return "first_action";
        case BetContext::FacingCheck: return "facing_check";
        case BetContext::FacingBet: return "facing_bet";
        case BetContext::AfterOneRaise: return "after_one_raise";
        case BetContext::AfterMultipleRaises: return "after_multiple_raises";
    }
    return "?";
}

/// Stack depths, the already-committed pot, and per-context bet menus
/// (as fractions of the pot) for both players.
struct BettingConfig {
    double stack1 = 0;
    double stack2 = 0;
    double potContribution = 0;
    std::array<std::vector<double>, kBetContexts> menu1{};
    std::array<std::vector<double>, kBetContexts> menu2{};
    bool allIn = true;
    /// Optional cap on the number of aggressive actions (bets, raises,
    /// all-ins) in the round; unset means unlimited.
    std::optional<int> raiseCap{};

    const std::vector<double>& menu(int player, BetContext ctx) const {
        const auto& m = player == 0 ? menu1 : menu2;
        return m[static_cast<size_t>(ctx)];
    }

    /// Largest contribution either player can reach: the shorter stack
    /// is the binding constraint, so both players share one cap and
    /// called all-ins stay symmetric.
    double cap() const { return potContribution + std::min(stack1, stack2); }

    void validate() const {
        if (!(stack1 > 0) || !(stack2 > 0))
            throw InvalidInputError("stacks must be positive");
        if (!(potContribution > 0))
            throw InvalidInputError("pot contribution must be positive");
        for (const auto* menus : {&menu1, &menu2})
            for (const auto& m : *menus)
                for (double f : m)
                    if (!(f > 0) || !std::isfinite(f))
                        throw InvalidInputError("bet fractions must be positive and finite");
        if (raiseCap && *raiseCap < 0)
            throw InvalidInputError("raise cap must be nonnegative");
    }
};

struct SkeletonAction {
    enum Kind { Check, Fold, Call, Bet, Raise, AllIn } kind = Check;
    double fraction = 0;  ///< pot fraction for Bet/Raise (0 otherwise)
    double target = 0;    ///< acting player's contribution after the action
    int seq = 0;          ///< acting player's sequence id, 1-based
    bool toTerminal = false;
    int child = -1;       ///< node index, or terminal index when toTerminal
};

struct SkeletonNode {
    int player = 0;
    double contrib1 = 0;
    double contrib2 = 0;
    BetContext context = BetContext::FirstAction;
    int parentSeq1 = 0;   ///< last sequence of player 1 on the path (0 = empty)
    int parentSeq2 = 0;
    std::vector<SkeletonAction> actions;

    int parentSeq(int player_) const { return player_ == 0 ? parentSeq1 : parentSeq2; }
};

struct SkeletonTerminal {
    enum Kind { Fold, Showdown } kind = Showdown;
    int folder = -1;      ///< player who folded (Fold terminals only)
    double q1 = 0;        ///< player 1 contribution at the leaf
    double q2 = 0;
    int seq1 = 0;         ///< last sequence of each player, 0 = empty
    int seq2 = 0;
    std::string path;     ///< action trail, e.g. "b0.75/r0.75/c"
};

/// The betting tree shared by all hand pairs: decision nodes in
/// preorder, terminals in depth-first order, and the sequence-form
/// bookkeeping both payoff assembly and the solver run on.
struct Skeleton {
    BettingConfig config;
    std::vector<SkeletonNode> nodes;
    std::vector<SkeletonTerminal> terminals;
    std::array<int, 2> seqCount{0, 0};
    std::array<std::vector<int>, 2> playerNodes{};  ///< preorder node ids per player
    std::array<std::vector<int>, 2> seqParent{};    ///< [seq] -> parent sequence, index 0 unused

    int sequences(int player) const { return seqCount[static_cast<size_t>(player)]; }
    int decisionNodes(int player) const {
        return static_cast<int>(playerNodes[static_cast<size_t>(player)].size());
    }
};

namespace detail {

inline std::string fractionToken(double f) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", f);
    return buf;
}

struct SkeletonBuilder {
    const BettingConfig& cfg;
    Skeleton out;
    double cap;

    explicit SkeletonBuilder(const BettingConfig& c) : cfg(c), cap(c.cap()) {
        out.config = c;
        out.seqParent[0].push_back(0);
        out.seqParent[1].push_back(0);
    }

    int newSeq(int player, int parentSeq) {
        int s = ++out.seqCount[static_cast<size_t>(player)];
        out.seqParent[static_cast<size_t>(player)].push_back(parentSeq);
        assert(static_cast<int>(out.seqParent[static_cast<size_t>(player)].size()) == s + 1);
        return s;
    }

    int addTerminal(SkeletonTerminal t) {
        out.terminals.push_back(std::move(t));
        return static_cast<int>(out.terminals.size()) - 1;
    }

    /// Expand the decision node where `player` acts with contributions
    /// (c1, c2); `bets` counts aggressive actions so far, `checked`
    /// flags a pending check. Returns the node index.
    int build(int player, double c1, double c2, int bets, bool checked,
              int ps1, int ps2, const std::string& path) {
        double own = player == 0 ? c1 : c2;
        double other = player == 0 ? c2 : c1;
        bool equal = std::abs(c1 - c2) <= kMoneyTol;

        BetContext ctx;
        if (equal)
            ctx = checked ? BetContext::FacingCheck : BetContext::FirstAction;
        else if (bets <= 1)
            ctx = BetContext::FacingBet;
        else if (bets == 2)
            ctx = BetContext::AfterOneRaise;
        else
            ctx = BetContext::AfterMultipleRaises;

        int nodeIdx = static_cast<int>(out.nodes.size());
        out.nodes.emplace_back();
        out.playerNodes[static_cast<size_t>(player)].push_back(nodeIdx);
        {
            SkeletonNode& n = out.nodes.back();
            n.player = player;
            n.contrib1 = c1;
            n.contrib2 = c2;
            n.context = ctx;
            n.parentSeq1 = ps1;
            n.parentSeq2 = ps2;
        }

        int ownParent = player == 0 ? ps1 : ps2;
        std::vector<SkeletonAction> acts;

        if (equal) {
            SkeletonAction a;
            a.kind = SkeletonAction::Check;
            a.target = own;
            acts.push_back(a);
        } else {
            SkeletonAction f;
            f.kind = SkeletonAction::Fold;
            f.target = own;
            acts.push_back(f);
            SkeletonAction c;
            c.kind = SkeletonAction::Call;
            c.target = other;
            acts.push_back(c);
        }

        bool aggressionOpen = !cfg.raiseCap || bets < *cfg.raiseCap;
        if (aggressionOpen) {
            struct Candidate {
                double target;
                double fraction;
                SkeletonAction::Kind kind;
            };
            std::vector<Candidate> cands;
            double maxc = std::max(c1, c2);
            for (double f : cfg.menu(player, ctx)) {
                double t = equal ? own + f * (c1 + c2) : other + f * (2.0 * other);
                if (t > cap - kMoneyTol) t = cap;
                if (t <= maxc + kMoneyTol) continue;
                cands.push_back({t, f, equal ? SkeletonAction::Bet : SkeletonAction::Raise});
            }
            if (cfg.allIn && cap > maxc + kMoneyTol)
                cands.push_back({cap, 0.0, SkeletonAction::AllIn});
            std::stable_sort(cands.begin(), cands.end(),
                             [](const Candidate& a, const Candidate& b) { return a.target < b.target; });
            for (size_t i = 0; i < cands.size(); ++i) {
                if (i > 0 && std::abs(cands[i].target - cands[i - 1].target) <= kMoneyTol)
                    continue;
                SkeletonAction a;
                a.target = cands[i].target;
                a.fraction = cands[i].fraction;
                a.kind = std::abs(a.target - cap) <= kMoneyTol ? SkeletonAction::AllIn
                                                               : cands[i].kind;
                acts.push_back(a);
            }
        }

        assert(!acts.empty());
        for (SkeletonAction& a : acts) a.seq = newSeq(player, ownParent);

        for (SkeletonAction& a : acts) {
            int nps1 = player == 0 ? a.seq : ps1;
            int nps2 = player == 1 ? a.seq : ps2;
            double nc1 = player == 0 ? a.target : c1;
            double nc2 = player == 1 ? a.target : c2;
            std::string token;
            switch (a.kind) {
                case SkeletonAction::Check: token = "k"; break;
                case SkeletonAction::Fold: token = "f"; break;
                case SkeletonAction::Call: token = "c"; break;
                case SkeletonAction::Bet: token = "b" + fractionToken(a.fraction); break;
                case SkeletonAction::Raise: token = "r" + fractionToken(a.fraction); break;
                case SkeletonAction::AllIn: token = "a"; break;
            }
            std::string childPath = path.empty() ? token : path + "/" + token;

            switch (a.kind) {
                case SkeletonAction::Check:
                    if (checked) {
                        SkeletonTerminal t;
                        t.kind = SkeletonTerminal::Showdown;
                        t.q1 = c1;
                        t.q2 = c2;
                        t.seq1 = nps1;
                        t.seq2 = nps2;
                        t.path = childPath;
                        a.toTerminal = true;
                        a.child = addTerminal(std::move(t));
                    } else {
                        a.child = build(1 - player, c1, c2, bets, true, nps1, nps2, childPath);
                    }
                    break;
                case SkeletonAction::Fold: {
                    SkeletonTerminal t;
                    t.kind = SkeletonTerminal::Fold;
                    t.folder = player;
                    t.q1 = c1;
                    t.q2 = c2;
                    t.seq1 = nps1;
                    t.seq2 = nps2;
                    t.path = childPath;
                    a.toTerminal = true;
                    a.child = addTerminal(std::move(t));
                    break;
                }
                case SkeletonAction::Call: {
                    SkeletonTerminal t;
                    t.kind = SkeletonTerminal::Showdown;
                    t.q1 = nc1;
                    t.q2 = nc2;
                    t.seq1 = nps1;
                    t.seq2 = nps2;
                    t.path = childPath;
                    a.toTerminal = true;
                    a.child = addTerminal(std::move(t));
                    break;
                }
                case SkeletonAction::Bet:
                case SkeletonAction::Raise:
                case SkeletonAction::AllIn:
                    a.child = build(1 - player, nc1, nc2, bets + 1, false, nps1, nps2, childPath);
                    break;
            }
        }
        out.nodes[static_cast<size_t>(nodeIdx)].actions = std::move(acts);
        return nodeIdx;
    }
};

} // namespace detail

/// Build the betting-round tree for a config. Player 1 acts first.
inline Skeleton buildSkeleton(const BettingConfig& config) {
    config.validate();
    detail::SkeletonBuilder b(config);
    b.build(0, config.potContribution, config.potContribution, 0, false, 0, 0, "");
    return std::move(b.out);
}

/// Fold and showdown payoff stamps over sequence pairs. F holds the
/// fold payments to player 1 (+q2 when player 2 folded, -q1 when
/// player 1 folded); S holds the contribution at stake at showdowns.
/// Supports are disjoint: a sequence pair pins down one terminal.
struct PayoffComponents {
    SpMatR F;
    SpMatR S;
};

inline PayoffComponents payoffComponents(const Skeleton& sk) {
    std::vector<Triplet> ft, st;
    for (const SkeletonTerminal& t : sk.terminals) {
        if (t.seq1 <= 0 || t.seq2 <= 0)
            throw ContractError("terminal missing a sequence for one player");
        int i = t.seq1 - 1, j = t.seq2 - 1;
        if (t.kind == SkeletonTerminal::Fold) {
            ft.emplace_back(i, j, t.folder == 1 ? t.q2 : -t.q1);
        } else {
            assert(std::abs(t.q1 - t.q2) <= kMoneyTol);
            st.emplace_back(i, j, t.q1);
        }
    }
    PayoffComponents out;
    out.F = makeSparse<SpMatR>(sk.sequences(0), sk.sequences(1), ft);
    out.S = makeSparse<SpMatR>(sk.sequences(0), sk.sequences(1), st);
    return out;
}

/// Sequence-form consistency system F x = f for one player over
/// `handCount` private hands: one row ties the empty sequence to 1,
/// then one row per (hand, decision node) forcing the actions at the
/// node to sum to the mass of the parent sequence. Column 0 is the
/// empty sequence; column 1 + h*n + (s-1) is sequence s of hand h.
struct SequenceConstraints {
    SpMatR F;
    Vec f;
};

inline SequenceConstraints sequenceConstraints(const Skeleton& sk, int player, int handCount) {
    if (player != 0 && player != 1) throw InvalidInputError("player must be 0 or 1");
    if (handCount <= 0) throw InvalidInputError("hand count must be positive");
    int n = sk.sequences(player);
    int nodes = sk.decisionNodes(player);
    Eigen::Index rows = 1 + static_cast<Eigen::Index>(handCount) * nodes;
    Eigen::Index cols = 1 + static_cast<Eigen::Index>(handCount) * n;
    std::vector<Triplet> trips;
    trips.emplace_back(0, 0, 1.0);
    for (int h = 0; h < handCount; ++h) {
        for (int vi = 0; vi < nodes; ++vi) {
            const SkeletonNode& node = sk.nodes[static_cast<size_t>(
                sk.playerNodes[static_cast<size_t>(player)][static_cast<size_t>(vi)])];
            Eigen::Index row = 1 + static_cast<Eigen::Index>(h) * nodes + vi;
            int p = node.parentSeq(player);
            Eigen::Index parentCol = p == 0 ? 0 : 1 + static_cast<Eigen::Index>(h) * n + (p - 1);
            trips.emplace_back(row, parentCol, -1.0);
            for (const SkeletonAction& a : node.actions)
                trips.emplace_back(row, 1 + static_cast<Eigen::Index>(h) * n + (a.seq - 1), 1.0);
        }
    }
    SequenceConstraints out;
    out.F = makeSparse<SpMatR>(rows, cols, trips);
    out.f = Vec::Zero(rows);
    out.f(0) = 1.0;
    return out;
}

} // namespace kronriver
