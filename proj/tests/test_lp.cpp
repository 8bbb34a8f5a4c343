#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "kronriver/instances.hpp"
#include "kronriver/lp.hpp"
#include "kronriver/solver.hpp"
#include "kronriver/sparsify.hpp"

using namespace kronriver;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(std::string p) : path(std::move(p)) {}
    ~TempFile() { std::remove(path.c_str()); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::int64_t termCount(const LpModel& m) {
    std::int64_t total = 0;
    for (const LpRow& r : m.rows) total += static_cast<std::int64_t>(r.terms.size());
    return total;
}

} // namespace

TEST_CASE("model structure on the bluffing micro-game") {
    KronPayoff kp = assemble(bluffingInstance());
    LpModel m = buildLpModel(kp, nullptr, 0);

    REQUIRE(m.xCount == 2 * kp.n1 + 1);
    REQUIRE(m.vCount == 3);
    REQUIRE(m.wCount == 0);
    REQUIRE(m.objective.size() == 1);
    REQUIRE(m.objective[0].var == "v0");

    int support = 0, flow = 0, coupling = 0;
    for (const LpRow& r : m.rows) {
        if (r.name.rfind("r1_", 0) == 0) {
            ++support;
            REQUIRE(r.sense == 'G');
            REQUIRE(r.rhs == 0.0);
        } else if (r.name.rfind("r2_", 0) == 0) {
            ++flow;
            REQUIRE(r.sense == 'E');
        } else {
            ++coupling;
        }
    }
    REQUIRE(support == kp.handCount(1) * kp.n2 + 1);
    REQUIRE(flow == 1 + kp.handCount(0) * kp.skeleton.decisionNodes(0));
    REQUIRE(coupling == 0);
    REQUIRE(m.rows[flow + support - 2].rhs == 0.0);

    LpRow first;
    for (const LpRow& r : m.rows)
        if (r.name == "r2_0") first = r;
    REQUIRE(first.terms.size() == 1);
    REQUIRE(first.terms[0].var == "x0");
    REQUIRE(first.rhs == 1.0);
}

TEST_CASE("factored model adds coupling rows and cuts coefficients") {
    KronPayoff kp = assemble(twentyCardInstance());
    const Sparsification s = postprocess(techniqueB(kp));

    LpModel direct = buildLpModel(kp, nullptr, 0);
    LpModel factored = buildLpModel(kp, &s, 0);

    REQUIRE(factored.wCount == static_cast<int>(s.k()));
    int coupling = 0;
    for (const LpRow& r : factored.rows)
        if (r.name.rfind("r3_", 0) == 0) ++coupling;
    REQUIRE(coupling == static_cast<int>(s.k()));
    REQUIRE(factored.rows.size() == direct.rows.size() + static_cast<size_t>(s.k()));

    std::vector<Triplet> trips = detail::payoffTriplets(kp, 5e7);
    SpMatC dense = makeSparse<SpMatC>(kp.rows(), kp.cols(), trips);
    if (size(s).total() < nonzeros(dense)) REQUIRE(termCount(factored) < termCount(direct));
}

TEST_CASE("lp files round trip through the reader") {
    std::mt19937_64 rng(5150);
    RiverInstance inst = randomSmallInstance(rng);
    KronPayoff kp = assemble(inst);
    const Sparsification s = postprocess(techniqueB(kp));

    for (int player : {0, 1}) {
        for (const Sparsification* sp : {static_cast<const Sparsification*>(nullptr), &s}) {
            LpModel m = buildLpModel(kp, sp, player);
            TempFile tmp("build/lp_round.lp");
            writeLpFile(m, tmp.path);
            LpModel back = readLpFile(tmp.path);

            REQUIRE(back.objective.size() == m.objective.size());
            REQUIRE(back.rows.size() == m.rows.size());
            for (size_t r = 0; r < m.rows.size(); ++r) {
                REQUIRE(back.rows[r].name == m.rows[r].name);
                REQUIRE(back.rows[r].sense == m.rows[r].sense);
                REQUIRE(back.rows[r].rhs == m.rows[r].rhs);
                REQUIRE(back.rows[r].terms.size() == m.rows[r].terms.size());
                for (size_t t = 0; t < m.rows[r].terms.size(); ++t) {
                    REQUIRE(back.rows[r].terms[t].var == m.rows[r].terms[t].var);
                    REQUIRE(back.rows[r].terms[t].coef == m.rows[r].terms[t].coef);
                }
            }
            REQUIRE(back.freeVars == m.freeVars);
        }
    }
}

TEST_CASE("milp differs from the lp only by the binaries section") {
    KronPayoff kp = assemble(bluffingInstance());
    const Sparsification s = postprocess(techniqueB(kp));
    LpModel m = buildLpModel(kp, &s, 0);

    TempFile lp("build/ex.lp"), milp("build/ex_int.lp");
    writeLpFile(m, lp.path);
    writeMilpFile(m, milp.path);

    std::string lpText = slurp(lp.path);
    std::string milpText = slurp(milp.path);

    size_t at = milpText.find("Binaries\n");
    REQUIRE(at != std::string::npos);
    size_t end = milpText.find("End\n");
    std::string stripped = milpText.substr(0, at) + milpText.substr(end);
    REQUIRE(stripped == lpText);

    LpModel back = readLpFile(milp.path);
    REQUIRE(back.strategyVars.size() == static_cast<size_t>(m.xCount));
    REQUIRE(readLpFile(lp.path).strategyVars.empty());
}

TEST_CASE("solved profile nearly satisfies the written model") {
    std::mt19937_64 rng(8080);
    RiverInstance inst = randomSmallInstance(rng);
    KronPayoff kp = assemble(inst);
    const Sparsification s = postprocess(techniqueB(kp));
    FactoredEngine eng(s);

    DcfrParams params;
    params.maxIters = 3000;
    params.targetExploitability = 1e-6;
    DcfrResult res = dcfrSolve(kp, eng, params);
    double pot = 2 * kp.skeleton.config.potContribution;

    for (int player : {0, 1}) {
        const Vec& mine = player == 0 ? res.avg1 : res.avg2;
        for (const Sparsification* sp : {static_cast<const Sparsification*>(nullptr), &s}) {
            LpModel m = buildLpModel(kp, sp, player);
            TempFile tmp("build/lp_profile.lp");
            writeLpFile(m, tmp.path);
            LpModel parsed = readLpFile(tmp.path);

            auto values = lpAssignment(kp, sp, eng, player, mine);
            double violation = lpMaxViolation(parsed, values);
            REQUIRE(violation <= 10 * res.exploitability * pot + 1e-9);

            double gameValue = player == 0 ? -bestResponseValue(kp, eng, 1, res.avg1)
                                           : -bestResponseValue(kp, eng, 0, res.avg2);
            REQUIRE(lpObjectiveValue(parsed, values) ==
                    Catch::Approx(gameValue).margin(1e-9 * (1 + std::abs(gameValue))));
        }
    }
}

TEST_CASE("pure optimum satisfies the integer model and matches enumeration") {
    for (const RiverInstance& inst : {bluffingInstance(), allTieInstance()}) {
        KronPayoff kp = assemble(inst);
        Sparsification s = postprocess(techniqueB(kp));
        FactoredEngine eng(s);

        for (int player : {0, 1}) {
            DeterministicOptimum det = enumerateDeterministicOptimum(kp, eng, player);

            LpModel m = buildLpModel(kp, &s, player);
            TempFile tmp("build/milp_check.lp");
            writeMilpFile(m, tmp.path);
            LpModel parsed = readLpFile(tmp.path);

            auto values = lpAssignment(kp, &s, eng, player, det.strategy);
            for (const std::string& xv : parsed.strategyVars) {
                double val = values.at(xv);
                REQUIRE((val == 0.0 || val == 1.0));
            }
            REQUIRE(lpMaxViolation(parsed, values) <= 1e-6);
            REQUIRE(lpObjectiveValue(parsed, values) ==
                    Catch::Approx(det.value).margin(1e-6));
        }
    }
}

TEST_CASE("direct export refuses oversized payoffs") {
    KronPayoff kp = assemble(twentyCardInstance());
    LpOptions opt;
    opt.nnzGuard = 100;
    REQUIRE_THROWS_AS(buildLpModel(kp, nullptr, 0, opt), GuardError);
}

TEST_CASE("negligible coefficients are dropped and counted") {
    RiverInstance inst = bluffingInstance();
    inst.beliefs[0][0] = 1e-20;
    inst.beliefs[0][1] = 1.0;
    KronPayoff kp = assemble(inst);
    LpModel m = buildLpModel(kp, nullptr, 0);
    REQUIRE(m.droppedCoefficients > 0);

    TempFile tmp("build/lp_dropped.lp");
    writeLpFile(m, tmp.path);
    REQUIRE_NOTHROW(readLpFile(tmp.path));
}

TEST_CASE("reader rejects foreign or damaged files") {
    TempFile tmp("build/lp_bad.lp");
    std::ofstream(tmp.path) << "Minimize\n obj: x\nEnd\n";
    REQUIRE_THROWS_AS(readLpFile(tmp.path), ParseError);

    std::ofstream(tmp.path) << "Maximize\n obj: + 1 v0\nSubject To\n r: + 1 x1 >=\nEnd\n";
    REQUIRE_THROWS_AS(readLpFile(tmp.path), ParseError);

    std::ofstream(tmp.path) << "Maximize\n obj: + 1 v0\nSubject To\n r: + bogus x1 >= 0\nEnd\n";
    REQUIRE_THROWS_AS(readLpFile(tmp.path), ParseError);

    REQUIRE_THROWS_AS(readLpFile("build/absent.lp"), IoError);
}
