#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "kronriver/engine.hpp"
#include "kronriver/errors.hpp"
#include "kronriver/kron.hpp"
#include "kronriver/skeleton.hpp"
#include "kronriver/solver.hpp"
#include "kronriver/sparsify.hpp"

namespace kronriver {

struct LpTerm {
    std::string var;
    double coef = 0;
};

struct LpRow {
    std::string name;
    std::vector<LpTerm> terms;
    char sense = 'G';  ///< 'G' for >=, 'E' for =
    double rhs = 0;
};

/// Sequence-form model in maximization orientation: the chosen
/// player's strategy weights x, the opponent's support values v, and,
/// when built from a factorization, the auxiliary vector w.
struct LpModel {
    std::vector<LpTerm> objective;
    std::vector<LpRow> rows;
    std::vector<std::string> freeVars;
    std::vector<std::string> strategyVars;  ///< the x block, in index order
    int xCount = 0;
    int vCount = 0;
    int wCount = 0;
    std::int64_t droppedCoefficients = 0;
};

struct LpOptions {
    double dropTol = 1e-12;
    double nnzGuard = 5e7;  ///< cap on direct payoff nonzeros
};

namespace detail {

/// Nonzeros of any sparse matrix bucketed per row or per column.
template <typename Mat>
std::vector<std::vector<std::pair<int, double>>> bucketize(const Mat& m, bool byRow) {
    std::vector<std::vector<std::pair<int, double>>> out(
        static_cast<size_t>(byRow ? m.rows() : m.cols()));
    for (int k = 0; k < m.outerSize(); ++k)
        for (typename Mat::InnerIterator it(m, k); it; ++it) {
            if (byRow)
                out[static_cast<size_t>(it.row())].emplace_back(static_cast<int>(it.col()),
                                                                it.value());
            else
                out[static_cast<size_t>(it.col())].emplace_back(static_cast<int>(it.row()),
                                                                it.value());
        }
    return out;
}

inline std::string varName(char block, int index) {
    return std::string(1, block) + std::to_string(index);
}

struct TermSink {
    LpRow* row = nullptr;
    double dropTol = 0;
    std::int64_t* dropped = nullptr;

    void add(char block, int index, double coef) {
        if (std::abs(coef) < dropTol) {
            ++*dropped;
            return;
        }
        row->terms.push_back({varName(block, index), coef});
    }
};

/// Direct sparse triplets of the payoff matrix, assembled block by
/// block; refuses once the count passes the guard.
inline std::vector<Triplet> payoffTriplets(const KronPayoff& kp, double nnzGuard) {
    std::vector<Triplet> trips;
    std::vector<Triplet> ftrips, strips;
    for (int k = 0; k < kp.F.outerSize(); ++k)
        for (SpMatR::InnerIterator it(kp.F, k); it; ++it)
            ftrips.emplace_back(it.row(), it.col(), it.value());
    for (int k = 0; k < kp.S.outerSize(); ++k)
        for (SpMatR::InnerIterator it(kp.S, k); it; ++it)
            strips.emplace_back(it.row(), it.col(), it.value());

    int m1 = kp.handCount(0), m2 = kp.handCount(1);
    for (int i = 0; i < m1; ++i)
        for (int j = 0; j < m2; ++j) {
            double p = kp.pi(i, j);
            if (p == 0.0) continue;
            double g = kp.W(i, j);
            if (trips.size() + ftrips.size() + strips.size() >
                static_cast<size_t>(nnzGuard))
                throw GuardError("direct payoff export exceeds the nonzero guard");
            Eigen::Index r0 = static_cast<Eigen::Index>(i) * kp.n1;
            Eigen::Index c0 = static_cast<Eigen::Index>(j) * kp.n2;
            for (const Triplet& t : ftrips)
                trips.emplace_back(r0 + t.row(), c0 + t.col(), p * t.value());
            if (g != 0.0)
                for (const Triplet& t : strips)
                    trips.emplace_back(r0 + t.row(), c0 + t.col(), p * g * t.value());
        }
    return trips;
}

} // namespace detail

/// Sequence-form LP for `player`: maximize the opponent's root support
/// value subject to support constraints over the opponent's sequences,
/// the player's own flow constraints, and, when a factorization is
/// supplied, the auxiliary coupling rows that replace the dense payoff
/// block.
inline LpModel buildLpModel(const KronPayoff& kp, const Sparsification* sp, int player,
                            const LpOptions& opt = {}) {
    if (player != 0 && player != 1) throw InvalidInputError("player must be 0 or 1");
    if (sp) {
        if (sp->rows() != kp.rows() || sp->cols() != kp.cols())
            throw InvalidInputError("factorization shape does not match the payoff");
    }
    const Skeleton& sk = kp.skeleton;
    int own = player, opp = 1 - player;
    int ownFlat = kp.handCount(own) * (own == 0 ? kp.n1 : kp.n2);
    int oppFlat = kp.handCount(opp) * (opp == 0 ? kp.n1 : kp.n2);
    double sign = player == 0 ? 1.0 : -1.0;

    SequenceConstraints Fown = sequenceConstraints(sk, own, kp.handCount(own));
    SequenceConstraints Fopp = sequenceConstraints(sk, opp, kp.handCount(opp));

    LpModel model;
    model.xCount = ownFlat + 1;
    model.vCount = static_cast<int>(Fopp.F.rows());
    model.wCount = sp ? sp->k() : 0;
    model.objective.push_back({"v0", 1.0});
    for (int i = 0; i < model.xCount; ++i)
        model.strategyVars.push_back(detail::varName('x', i));
    for (int r = 0; r < model.vCount; ++r)
        model.freeVars.push_back(detail::varName('v', r));
    for (int k = 0; k < model.wCount; ++k)
        model.freeVars.push_back(detail::varName('w', k));

    detail::TermSink sink{nullptr, opt.dropTol, &model.droppedCoefficients};

    // payoff entries bucketed by the opponent's flat sequence index
    std::vector<std::vector<std::pair<int, double>>> payoffByOpp(
        static_cast<size_t>(oppFlat));
    std::vector<std::vector<std::pair<int, double>>> auxByOpp;
    std::vector<std::vector<std::pair<int, double>>> coupleOwn, coupleW;
    if (!sp) {
        for (const Triplet& t : detail::payoffTriplets(kp, opt.nnzGuard)) {
            int ownIdx = player == 0 ? static_cast<int>(t.row()) : static_cast<int>(t.col());
            int oppIdx = player == 0 ? static_cast<int>(t.col()) : static_cast<int>(t.row());
            payoffByOpp[static_cast<size_t>(oppIdx)].emplace_back(ownIdx, sign * t.value());
        }
    } else {
        for (int k = 0; k < sp->Ahat.outerSize(); ++k)
            for (SpMatR::InnerIterator it(sp->Ahat, k); it; ++it) {
                int ownIdx = player == 0 ? static_cast<int>(it.row())
                                         : static_cast<int>(it.col());
                int oppIdx = player == 0 ? static_cast<int>(it.col())
                                         : static_cast<int>(it.row());
                payoffByOpp[static_cast<size_t>(oppIdx)].emplace_back(ownIdx,
                                                                      sign * it.value());
            }
        if (player == 0) {
            auxByOpp = detail::bucketize(sp->V, true);    // V rows follow opponent coords
            coupleOwn = detail::bucketize(sp->U, false);  // U columns per aux row
            coupleW = detail::bucketize(sp->M, false);    // M columns give w terms
        } else {
            auxByOpp = detail::bucketize(sp->U, true);
            for (auto& bucket : auxByOpp)
                for (auto& term : bucket) term.second = -term.second;
            coupleOwn = detail::bucketize(sp->V, false);
            coupleW = detail::bucketize(sp->M, true);  // M rows give w terms
        }
    }

    // support constraints, one per opponent sequence coordinate
    auto f2cols = detail::bucketize(Fopp.F, false);
    for (int j = 0; j <= oppFlat; ++j) {
        LpRow row;
        row.name = "r1_" + std::to_string(j);
        row.sense = 'G';
        row.rhs = 0;
        sink.row = &row;
        if (j > 0) {
            for (const auto& [ownIdx, val] : payoffByOpp[static_cast<size_t>(j - 1)])
                sink.add('x', ownIdx + 1, val);
            if (sp)
                for (const auto& [k, val] : auxByOpp[static_cast<size_t>(j - 1)])
                    sink.add('w', k, val);
        }
        for (const auto& [r, val] : f2cols[static_cast<size_t>(j)]) sink.add('v', r, -val);
        model.rows.push_back(std::move(row));
    }

    // own flow conservation
    auto f1rows = detail::bucketize(Fown.F, true);
    for (size_t r = 0; r < f1rows.size(); ++r) {
        LpRow row;
        row.name = "r2_" + std::to_string(r);
        row.sense = 'E';
        row.rhs = Fown.f(static_cast<Eigen::Index>(r));
        sink.row = &row;
        for (const auto& [c, val] : f1rows[r]) sink.add('x', c, val);
        model.rows.push_back(std::move(row));
    }

    // auxiliary coupling: one row per factorization column
    if (sp) {
        for (int k = 0; k < model.wCount; ++k) {
            LpRow row;
            row.name = "r3_" + std::to_string(k);
            row.sense = 'E';
            row.rhs = 0;
            sink.row = &row;
            for (const auto& [ownIdx, val] : coupleOwn[static_cast<size_t>(k)])
                sink.add('x', ownIdx + 1, val);
            for (const auto& [r, val] : coupleW[static_cast<size_t>(k)])
                sink.add('w', r, -val);
            model.rows.push_back(std::move(row));
        }
    }
    return model;
}

namespace detail {

inline void appendNumber(std::string& out, double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    out += buf;
}

inline void emitLpText(const LpModel& model, const std::string& path, bool binaries) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    std::string text;
    text += "\\ sequence-form model: rows follow the maximizing player\n";
    text += "Maximize\n obj:";
    for (const LpTerm& t : model.objective) {
        text += t.coef < 0 ? " - " : " + ";
        appendNumber(text, std::abs(t.coef));
        text += ' ';
        text += t.var;
    }
    text += "\nSubject To\n";
    for (const LpRow& row : model.rows) {
        text += ' ';
        text += row.name;
        text += ':';
        if (row.terms.empty()) text += " 0 x0";
        int onLine = 0;
        for (const LpTerm& t : row.terms) {
            if (onLine == 8) {
                text += "\n   ";
                onLine = 0;
            }
            text += t.coef < 0 ? " - " : " + ";
            appendNumber(text, std::abs(t.coef));
            text += ' ';
            text += t.var;
            ++onLine;
        }
        text += row.sense == 'G' ? " >= " : " = ";
        appendNumber(text, row.rhs);
        text += '\n';
    }
    if (!model.freeVars.empty()) {
        text += "Bounds\n";
        for (const std::string& v : model.freeVars) {
            text += ' ';
            text += v;
            text += " free\n";
        }
    }
    if (binaries) {
        text += "Binaries\n";
        for (const std::string& v : model.strategyVars) {
            text += ' ';
            text += v;
            text += '\n';
        }
    }
    text += "End\n";
    out << text;
    if (!out) throw IoError("failed writing '" + path + "'");
}

} // namespace detail

inline void writeLpFile(const LpModel& model, const std::string& path) {
    detail::emitLpText(model, path, false);
}

inline void writeMilpFile(const LpModel& model, const std::string& path) {
    detail::emitLpText(model, path, true);
}

/// Parses files produced by writeLpFile/writeMilpFile (a strict subset
/// of the LP text format: explicit coefficients, >=/= rows, free
/// bounds, binaries).
inline LpModel readLpFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '\\') continue;
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) tokens.push_back(tok);
    }
    size_t pos = 0;
    auto need = [&](const char* what) -> const std::string& {
        if (pos >= tokens.size())
            throw ParseError(std::string("unexpected end of file, expected ") + what);
        return tokens[pos];
    };
    auto accept = [&](const std::string& word) {
        if (pos < tokens.size() && tokens[pos] == word) {
            ++pos;
            return true;
        }
        return false;
    };
    auto number = [&](const std::string& tok, double& out) {
        char* end = nullptr;
        out = std::strtod(tok.c_str(), &end);
        return end == tok.c_str() + tok.size() && !tok.empty();
    };

    LpModel model;
    if (!accept("Maximize")) throw ParseError("expected Maximize");
    auto parseTerms = [&](std::vector<LpTerm>& terms, const char* stopHint) -> std::string {
        while (true) {
            const std::string& tok = need(stopHint);
            if (tok != "+" && tok != "-") return tok;
            double s = tok == "+" ? 1.0 : -1.0;
            ++pos;
            double coef = 0;
            if (!number(need("coefficient"), coef))
                throw ParseError("expected coefficient, found '" + tokens[pos] + "'");
            ++pos;
            const std::string& var = need("variable");
            double dummy = 0;
            if (var == "+" || var == "-" || number(var, dummy))
                throw ParseError("expected variable name");
            terms.push_back({var, s * coef});
            ++pos;
        }
    };

    if (need("objective label") != "obj:") throw ParseError("expected obj: label");
    ++pos;
    std::string tok = parseTerms(model.objective, "objective terms");
    if (tok != "Subject") throw ParseError("expected Subject To");
    ++pos;
    if (!accept("To")) throw ParseError("expected Subject To");

    while (true) {
        const std::string& head = need("row or section");
        if (head == "Bounds" || head == "Binaries" || head == "End") break;
        if (head.empty() || head.back() != ':')
            throw ParseError("expected row label, found '" + head + "'");
        LpRow row;
        row.name = head.substr(0, head.size() - 1);
        ++pos;
        // the writer emits "0 x0" as the body of an all-dropped row
        if (pos + 1 < tokens.size() && tokens[pos] == "0" && tokens[pos + 1] == "x0")
            pos += 2;
        std::string senseTok = parseTerms(row.terms, "row terms");
        if (senseTok == ">=")
            row.sense = 'G';
        else if (senseTok == "=")
            row.sense = 'E';
        else
            throw ParseError("expected >= or = in row " + row.name);
        ++pos;
        if (!number(need("right-hand side"), row.rhs))
            throw ParseError("expected numeric right-hand side in row " + row.name);
        ++pos;
        model.rows.push_back(std::move(row));
    }

    if (accept("Bounds")) {
        while (true) {
            const std::string& head = need("bound or section");
            if (head == "Binaries" || head == "End") break;
            ++pos;
            if (!accept("free")) throw ParseError("expected 'free' after " + head);
            model.freeVars.push_back(head);
        }
    }
    if (accept("Binaries")) {
        while (true) {
            const std::string& head = need("binary variable or End");
            if (head == "End") break;
            model.strategyVars.push_back(head);
            ++pos;
        }
    }
    if (!accept("End")) throw ParseError("expected End");

    for (const std::string& v : model.freeVars) {
        if (v[0] == 'v') ++model.vCount;
        if (v[0] == 'w') ++model.wCount;
    }
    model.xCount = static_cast<int>(model.strategyVars.size());
    return model;
}

inline double lpObjectiveValue(const LpModel& model,
                               const std::unordered_map<std::string, double>& values) {
    double total = 0;
    for (const LpTerm& t : model.objective) {
        auto it = values.find(t.var);
        if (it != values.end()) total += t.coef * it->second;
    }
    return total;
}

/// Largest constraint violation of an assignment; absent variables
/// count as zero.
inline double lpMaxViolation(const LpModel& model,
                             const std::unordered_map<std::string, double>& values) {
    double worst = 0;
    for (const LpRow& row : model.rows) {
        double lhs = 0;
        for (const LpTerm& t : row.terms) {
            auto it = values.find(t.var);
            if (it != values.end()) lhs += t.coef * it->second;
        }
        double v = row.sense == 'G' ? std::max(0.0, row.rhs - lhs) : std::abs(lhs - row.rhs);
        worst = std::max(worst, v);
    }
    return worst;
}

/// Support values of the responding player against a fixed strategy:
/// the bottom-up minimum over the responder's actions, stored per
/// (hand, node) plus the root aggregate in slot 0. These satisfy the
/// support constraints of the corresponding model with equality at the
/// minimizing action.
inline std::vector<double> dualSupportValues(const KronPayoff& kp, const GradientEngine& eng,
                                             int responder, const Vec& fixedStrategy) {
    if (responder != 0 && responder != 1) throw InvalidInputError("player must be 0 or 1");
    const Skeleton& sk = kp.skeleton;
    Vec g = responder == 1 ? eng.ATx(fixedStrategy) : Vec(-eng.Ax(fixedStrategy));
    int n = responder == 0 ? kp.n1 : kp.n2;
    const auto& nodes = sk.playerNodes[static_cast<size_t>(responder)];
    int nodeCount = static_cast<int>(nodes.size());
    int hands = kp.handCount(responder);

    std::vector<double> v(1 + static_cast<size_t>(hands) * nodeCount, 0.0);
    std::vector<double> seqVal(static_cast<size_t>(n) + 1);
    for (int h = 0; h < hands; ++h) {
        int off = h * n;
        std::fill(seqVal.begin(), seqVal.end(), 0.0);
        for (int idx = nodeCount - 1; idx >= 0; --idx) {
            const SkeletonNode& node = sk.nodes[static_cast<size_t>(nodes[static_cast<size_t>(idx)])];
            double bestVal = 0;
            bool first = true;
            for (const auto& a : node.actions) {
                double ev = g(off + a.seq - 1) + seqVal[static_cast<size_t>(a.seq)];
                if (first || ev < bestVal) bestVal = ev;
                first = false;
            }
            v[1 + static_cast<size_t>(h) * nodeCount + static_cast<size_t>(idx)] = bestVal;
            seqVal[static_cast<size_t>(node.parentSeq(responder))] += bestVal;
        }
        v[0] += seqVal[0];
    }
    return v;
}

/// Full variable assignment for the model of `player`: the strategy
/// block from a sequence-form vector, support values from the
/// opponent's minimizing walk, and the auxiliary block from the
/// triangular solve.
inline std::unordered_map<std::string, double> lpAssignment(const KronPayoff& kp,
                                                            const Sparsification* sp,
                                                            const GradientEngine& eng,
                                                            int player, const Vec& strategy) {
    detail::validateSequenceStrategy(kp.skeleton, player, kp.handCount(player), strategy,
                                     1e-6);
    std::unordered_map<std::string, double> values;
    values["x0"] = 1.0;
    for (Eigen::Index i = 0; i < strategy.size(); ++i)
        values[detail::varName('x', static_cast<int>(i) + 1)] = strategy(i);

    std::vector<double> v = dualSupportValues(kp, eng, 1 - player, strategy);
    for (size_t r = 0; r < v.size(); ++r)
        values[detail::varName('v', static_cast<int>(r))] = v[r];

    if (sp) {
        Vec w;
        if (player == 0) {
            w = sp->U.transpose() * strategy;
            if (!isIdentity(sp->M)) solveUnitLowerT(sp->M, w);
        } else {
            w = sp->V.transpose() * strategy;
            if (!isIdentity(sp->M)) solveUnitLower(sp->M, w);
        }
        for (Eigen::Index k = 0; k < w.size(); ++k)
            values[detail::varName('w', static_cast<int>(k))] = w(k);
    }
    return values;
}

} // namespace kronriver
