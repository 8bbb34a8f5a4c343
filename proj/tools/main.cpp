#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "kronriver/bundle_io.hpp"
#include "kronriver/instance_io.hpp"
#include "kronriver/instances.hpp"
#include "kronriver/kron.hpp"
#include "kronriver/lp.hpp"
#include "kronriver/solver.hpp"
#include "kronriver/sparsify.hpp"

using namespace kronriver;

namespace {

struct Options {
    std::string instance;
    std::string bundle;
    std::string technique = "b";
    bool techniqueGiven = false;
    int iters = 1000;
    double targetExpl = 0.0;
    std::uint64_t seed = 1;
    int threads = 1;
    bool deterministic = false;
    std::string out = "out";
    double guard = 0.0;
};

double seconds(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void ensureDir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());
}

RiverInstance loadInstance(const Options& opt) {
    if (opt.instance.empty()) throw InvalidInputError("--instance is required");
    return readInstance(opt.instance);
}

Sparsification makeSparsification(const KronPayoff& kp, const std::string& technique) {
    Technique t = techniqueFromName(technique);
    Sparsification s = t == Technique::A ? techniqueA(kp, sparsifyW(kp.W)) : techniqueB(kp);
    return postprocess(s);
}

DcfrParams solveParams(const Options& opt) {
    DcfrParams p;
    p.maxIters = opt.iters;
    p.targetExploitability = opt.targetExpl;
    p.threads = opt.deterministic ? 1 : opt.threads;
    return p;
}

DenseMat reconstruct(const Sparsification& s) {
    DenseMat Vt = DenseMat(s.V).transpose();
    DenseMat M = DenseMat(s.M);
    DenseMat X = M.triangularView<Eigen::Lower>().solve(Vt);
    return DenseMat(s.Ahat) + DenseMat(s.U) * X;
}

int runBuild(const Options& opt) {
    RiverInstance inst = loadInstance(opt);
    KronPayoff kp = assemble(inst);
    const Skeleton& sk = kp.skeleton;

    int folds = 0, showdowns = 0;
    for (const auto& t : sk.terminals)
        (t.kind == SkeletonTerminal::Fold ? folds : showdowns)++;

    std::printf("skeleton: nodes=%zu p1_decisions=%d p2_decisions=%d p1_sequences=%d "
                "p2_sequences=%d terminals=%zu folds=%d showdowns=%d\n",
                sk.nodes.size(), sk.decisionNodes(0), sk.decisionNodes(1), sk.sequences(0),
                sk.sequences(1), sk.terminals.size(), folds, showdowns);
    std::printf("payoff: hands=%dx%d matrix=%ldx%ld beta=%.12g\n", kp.handCount(0),
                kp.handCount(1), static_cast<long>(kp.rows()), static_cast<long>(kp.cols()),
                kp.beta);

    std::printf("%-24s %-9s %12s %12s\n", "line", "kind", "p1_in", "p2_in");
    for (const auto& t : sk.terminals)
        std::printf("%-24s %-9s %12.2f %12.2f\n", t.path.c_str(),
                    t.kind == SkeletonTerminal::Fold ? "fold" : "showdown", t.q1, t.q2);
    return 0;
}

int runSparsify(const Options& opt) {
    RiverInstance inst = loadInstance(opt);
    KronPayoff kp = assemble(inst);

    auto t0 = std::chrono::steady_clock::now();
    Sparsification s = makeSparsification(kp, opt.technique);
    double elapsed = seconds(t0);

    ensureDir(opt.out);
    writeSparsification(s, opt.out);

    std::int64_t dense = densePayoffNonzeros(kp);
    SizeReport rep = size(s);
    std::printf("%-20s %14s %10s %9s %8s\n", "game", "unsparsified", "size", "time", "ratio");
    std::printf("%-20s %14lld %10lld %8.3fs %8.2f\n",
                std::filesystem::path(opt.instance).stem().string().c_str(),
                static_cast<long long>(dense), static_cast<long long>(rep.total()), elapsed,
                dense > 0 ? static_cast<double>(dense) / static_cast<double>(rep.total()) : 0.0);
    std::printf("factors: ahat=%lld u=%lld m=%lld v=%lld k=%ld technique=%s postprocessed=1\n",
                static_cast<long long>(rep.ahat), static_cast<long long>(rep.u),
                static_cast<long long>(rep.m), static_cast<long long>(rep.v),
                static_cast<long>(s.k()), techniqueName(s.technique).c_str());
    std::printf("bundle: %s\n", opt.out.c_str());
    return 0;
}

int runSolve(const Options& opt) {
    RiverInstance inst = loadInstance(opt);
    KronPayoff kp = assemble(inst);

    Sparsification s;
    if (!opt.bundle.empty()) {
        s = readSparsification(opt.bundle);
        if (s.rows() != kp.rows() || s.cols() != kp.cols())
            throw InvalidInputError("bundle shape " + std::to_string(s.rows()) + "x" +
                                    std::to_string(s.cols()) + " does not match the instance");
    } else {
        s = makeSparsification(kp, opt.technique);
    }
    FactoredEngine eng(s);

    DcfrResult res = dcfrSolve(kp, eng, solveParams(opt));

    ensureDir(opt.out);
    std::string tracePath = opt.out + "/trace.csv";
    std::string profilePath = opt.out + "/profile.json";
    writeTrace(tracePath, res.trace);

    nlohmann::json profile;
    profile["schema_version"] = 1;
    profile["iterations"] = res.iterations;
    profile["exploitability"] = res.exploitability;
    profile["gradient_flops"] = res.gradientFlops;
    profile["strategy1"] = std::vector<double>(res.avg1.data(), res.avg1.data() + res.avg1.size());
    profile["strategy2"] = std::vector<double>(res.avg2.data(), res.avg2.data() + res.avg2.size());
    std::ofstream pf(profilePath);
    if (!pf) throw IoError("cannot open '" + profilePath + "' for writing");
    pf << profile.dump(2) << "\n";

    std::printf("solve: iterations=%d exploitability=%.12g gradient_flops=%lld trace=%s "
                "profile=%s\n",
                res.iterations, res.exploitability, static_cast<long long>(res.gradientFlops),
                tracePath.c_str(), profilePath.c_str());
    return 0;
}

int runDet(const Options& opt) {
    RiverInstance inst = loadInstance(opt);
    KronPayoff kp = assemble(inst);
    Sparsification s = makeSparsification(kp, opt.technique);
    FactoredEngine eng(s);

    DcfrResult res = dcfrSolve(kp, eng, solveParams(opt));
    double pot = 2 * kp.skeleton.config.potContribution;
    double guard = opt.guard > 0 ? opt.guard : 1e6;

    std::printf("mixed profile: iterations=%d exploitability=%.6g pot=%.2f\n", res.iterations,
                res.exploitability, pot);
    std::printf("%-7s %14s %14s %22s\n", "player", "mixed_value", "deterministic",
                "price_of_determinism");
    for (int player : {0, 1}) {
        double mixed = player == 0 ? -bestResponseValue(kp, eng, 1, res.avg1)
                                   : -bestResponseValue(kp, eng, 0, res.avg2);
        DeterministicOptimum det = enumerateDeterministicOptimum(kp, eng, player, guard);
        std::printf("%-7d %14.6f %14.6f %21.4f%%\n", player + 1, mixed, det.value,
                    100 * priceOfDeterminism(mixed, det.value, pot));
    }
    return 0;
}

int runExport(const Options& opt, bool integer) {
    RiverInstance inst = loadInstance(opt);
    KronPayoff kp = assemble(inst);

    Sparsification s;
    const Sparsification* sp = nullptr;
    if (opt.techniqueGiven) {
        s = makeSparsification(kp, opt.technique);
        sp = &s;
    }
    LpOptions lpOpt;
    if (opt.guard > 0) lpOpt.nnzGuard = opt.guard;

    ensureDir(opt.out);
    for (int player : {0, 1}) {
        LpModel model = buildLpModel(kp, sp, player, lpOpt);
        std::string path = opt.out + "/player" + std::to_string(player + 1) +
                           (integer ? ".milp" : ".lp");
        if (integer)
            writeMilpFile(model, path);
        else
            writeLpFile(model, path);

        std::int64_t terms = 0;
        for (const LpRow& r : model.rows) terms += static_cast<std::int64_t>(r.terms.size());
        std::printf("%s: rows=%zu vars=%d coefficients=%lld dropped=%lld form=%s\n", path.c_str(),
                    model.rows.size(), model.xCount + model.vCount + model.wCount,
                    static_cast<long long>(terms),
                    static_cast<long long>(model.droppedCoefficients),
                    sp ? "factored" : "direct");
    }
    return 0;
}

int runCheck(const Options& opt) {
    RiverInstance inst;
    if (!opt.instance.empty()) {
        inst = readInstance(opt.instance);
    } else {
        std::mt19937_64 rng(opt.seed);
        inst = randomSmallInstance(rng, 4);
        std::printf("check: random 4-hand instance, seed=%llu\n",
                    static_cast<unsigned long long>(opt.seed));
    }
    KronPayoff kp = assemble(inst);
    DenseMat A = denseExpand(kp, opt.guard > 0 ? opt.guard : 5e7);
    double scale = A.cwiseAbs().maxCoeff();
    double tol = 1e-9 * scale;

    std::mt19937_64 rng(opt.seed + 17);
    std::normal_distribution<double> gauss;
    double worst = 0;
    bool pass = true;

    for (Technique tech : {Technique::A, Technique::B}) {
        for (bool post : {false, true}) {
            Sparsification s = tech == Technique::A ? techniqueA(kp, sparsifyW(kp.W))
                                                    : techniqueB(kp);
            if (post) s = postprocess(s);
            double residual = (reconstruct(s) - A).cwiseAbs().maxCoeff();
            worst = std::max(worst, residual);

            FactoredEngine eng(s);
            for (int rep = 0; rep < 10; ++rep) {
                Vec x = Vec::NullaryExpr(kp.cols(), [&](Eigen::Index) { return gauss(rng); });
                Vec y = Vec::NullaryExpr(kp.rows(), [&](Eigen::Index) { return gauss(rng); });
                Vec ax = eng.Ax(x), atx = eng.ATx(y);
                double mv = (ax - A * x).cwiseAbs().maxCoeff() /
                            (1 + Vec(A * x).cwiseAbs().maxCoeff());
                double mvT = (atx - A.transpose() * y).cwiseAbs().maxCoeff() /
                             (1 + Vec(A.transpose() * y).cwiseAbs().maxCoeff());
                worst = std::max({worst, mv * scale, mvT * scale});
            }
            bool ok = worst <= tol;
            pass = pass && ok;
            std::printf("check technique=%s postprocessed=%d residual=%.3g %s\n",
                        techniqueName(tech).c_str(), post ? 1 : 0, residual,
                        ok ? "ok" : "FAIL");
        }
    }

    if (pass) {
        std::printf("PASS max_residual=%.3g tolerance=%.3g\n", worst, tol);
        return 0;
    }
    std::printf("FAIL max_residual=%.3g tolerance=%.3g\n", worst, tol);
    return 1;
}

int runBench(const Options& opt) {
    std::printf("%-16s %14s | %10s %8s %7s | %10s %8s %7s\n", "game", "unsparsified", "A size",
                "A time", "A ratio", "B size", "B time", "B ratio");

    std::vector<int> sweep = {50, 75, 100, 150};
    KronPayoff last;
    Sparsification lastS;
    for (size_t idx = 0; idx < sweep.size(); ++idx) {
        int hands = sweep[idx];
        RiverInstance inst = benchInstance(opt.seed + idx, hands);
        KronPayoff kp = assemble(inst);
        std::int64_t dense = densePayoffNonzeros(kp);

        auto ta = std::chrono::steady_clock::now();
        Sparsification sa = postprocess(techniqueA(kp, sparsifyW(kp.W)));
        double timeA = seconds(ta);

        auto tb = std::chrono::steady_clock::now();
        Sparsification sb = postprocess(techniqueB(kp));
        double timeB = seconds(tb);

        std::int64_t sizeA = size(sa).total(), sizeB = size(sb).total();
        char name[64];
        std::snprintf(name, sizeof(name), "river-%d-s%llu", hands,
                      static_cast<unsigned long long>(opt.seed + idx));
        std::printf("%-16s %14lld | %10lld %7.3fs %6.1fx | %10lld %7.3fs %6.1fx\n", name,
                    static_cast<long long>(dense), static_cast<long long>(sizeA), timeA,
                    static_cast<double>(dense) / static_cast<double>(sizeA),
                    static_cast<long long>(sizeB), timeB,
                    static_cast<double>(dense) / static_cast<double>(sizeB));
        if (idx + 1 == sweep.size()) {
            last = std::move(kp);
            lastS = std::move(sb);
        }
    }

    FactoredEngine eng(lastS);
    ReferenceEngine ref(last);
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> gauss;
    Vec x = Vec::NullaryExpr(last.cols(), [&](Eigen::Index) { return gauss(rng); });

    int reps = 50;
    auto tf = std::chrono::steady_clock::now();
    double sink = 0;
    for (int r = 0; r < reps; ++r) sink += eng.Ax(x).sum();
    double factoredMs = seconds(tf) / reps * 1e3;

    auto tr = std::chrono::steady_clock::now();
    for (int r = 0; r < 3; ++r) sink += ref.Ax(x).sum();
    double referenceMs = seconds(tr) / 3 * 1e3;

    std::int64_t flopsPerOp = eng.flops() / (reps + 0);
    std::printf("matvec hands=%d: factored %.3f ms/op (%lld flops), blockwise %.3f ms/op, "
                "speedup %.1fx (checksum %.3g)\n",
                last.handCount(0), factoredMs, static_cast<long long>(flopsPerOp), referenceMs,
                referenceMs / factoredMs, sink);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kronecker-factored river endgame toolkit"};
    app.require_subcommand(1);

    Options opt;
    int rc = 0;

    auto addCommon = [&](CLI::App* sub, bool needsInstance) {
        auto* inst = sub->add_option("--instance", opt.instance, "instance JSON path");
        if (needsInstance) inst->required();
        sub->add_option("--seed", opt.seed, "random seed");
    };

    CLI::App* build = app.add_subcommand("build", "print skeleton stats and the contribution table");
    addCommon(build, true);
    build->callback([&] { rc = runBuild(opt); });

    CLI::App* sparsify = app.add_subcommand("sparsify", "factor the payoff and write a bundle");
    addCommon(sparsify, true);
    sparsify->add_option("--technique", opt.technique, "a or b")->check(CLI::IsMember({"a", "b"}));
    sparsify->add_option("--out", opt.out, "bundle directory");
    sparsify->add_flag("--deterministic", opt.deterministic, "single-threaded reductions");
    sparsify->callback([&] { rc = runSparsify(opt); });

    CLI::App* solve = app.add_subcommand("solve", "run the regret solver and write trace + profile");
    addCommon(solve, true);
    solve->add_option("--technique", opt.technique, "a or b")->check(CLI::IsMember({"a", "b"}));
    solve->add_option("--bundle", opt.bundle, "load factors from this bundle directory");
    solve->add_option("--iters", opt.iters, "iteration cap")->check(CLI::PositiveNumber);
    solve->add_option("--target-expl", opt.targetExpl, "stop at this normalized exploitability");
    solve->add_option("--threads", opt.threads, "sweep threads")->check(CLI::PositiveNumber);
    solve->add_flag("--deterministic", opt.deterministic, "single-threaded reductions");
    solve->add_option("--out", opt.out, "artifact directory");
    solve->callback([&] { rc = runSolve(opt); });

    CLI::App* det = app.add_subcommand("det", "price of determinism via pure-strategy enumeration");
    addCommon(det, true);
    det->add_option("--technique", opt.technique, "a or b")->check(CLI::IsMember({"a", "b"}));
    det->add_option("--iters", opt.iters, "mixed-profile iteration cap")->check(CLI::PositiveNumber);
    det->add_option("--target-expl", opt.targetExpl, "mixed-profile exploitability target");
    det->add_option("--threads", opt.threads, "sweep threads")->check(CLI::PositiveNumber);
    det->add_flag("--deterministic", opt.deterministic, "single-threaded reductions");
    det->add_option("--guard", opt.guard, "pure-strategy enumeration cap");
    det->callback([&] { rc = runDet(opt); });

    CLI::App* exportLp = app.add_subcommand("export-lp", "write sequence-form LP files");
    addCommon(exportLp, true);
    exportLp->add_option("--technique", opt.technique, "factor with a or b; omit for direct export")
        ->check(CLI::IsMember({"a", "b"}));
    exportLp->add_option("--out", opt.out, "output directory");
    exportLp->add_option("--guard", opt.guard, "direct-export nonzero cap");
    exportLp->callback([&] {
        opt.techniqueGiven = exportLp->count("--technique") > 0;
        rc = runExport(opt, false);
    });

    CLI::App* exportMilp = app.add_subcommand("export-milp", "write integer models for pure strategies");
    addCommon(exportMilp, true);
    exportMilp->add_option("--technique", opt.technique, "factor with a or b; omit for direct export")
        ->check(CLI::IsMember({"a", "b"}));
    exportMilp->add_option("--out", opt.out, "output directory");
    exportMilp->add_option("--guard", opt.guard, "direct-export nonzero cap");
    exportMilp->callback([&] {
        opt.techniqueGiven = exportMilp->count("--technique") > 0;
        rc = runExport(opt, true);
    });

    CLI::App* check = app.add_subcommand("check", "verify factors and matvecs against the dense payoff");
    addCommon(check, false);
    check->add_option("--guard", opt.guard, "dense expansion entry cap");
    check->callback([&] { rc = runCheck(opt); });

    CLI::App* bench = app.add_subcommand("bench", "sweep synthetic instances and report size ratios");
    bench->add_option("--seed", opt.seed, "random seed");
    bench->add_option("--threads", opt.threads, "sweep threads")->check(CLI::PositiveNumber);
    bench->callback([&] { rc = runBench(opt); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const Error& e) {
        std::fprintf(stderr, "error code=%s msg=\"%s\"\n", e.code().c_str(), e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error code=INTERNAL msg=\"%s\"\n", e.what());
        return 3;
    }
    return rc;
}
