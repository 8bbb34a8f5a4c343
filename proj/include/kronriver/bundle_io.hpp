#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "kronriver/errors.hpp"
#include "kronriver/matrix_market.hpp"
#include "kronriver/sparsify.hpp"

namespace kronriver {

inline constexpr int kBundleSchemaVersion = 1;

inline std::string techniqueName(Technique t) { return t == Technique::A ? "a" : "b"; }

inline Technique techniqueFromName(const std::string& name) {
    if (name == "a" || name == "A") return Technique::A;
    if (name == "b" || name == "B") return Technique::B;
    throw ParseError("unknown technique '" + name + "', expected 'a' or 'b'");
}

/// Write a decomposition as a directory bundle: header.json plus one
/// Matrix Market file per factor. Overwrites existing files in place.
inline void writeSparsification(const Sparsification& s, const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());

    nlohmann::json header;
    header["schema_version"] = kBundleSchemaVersion;
    header["technique"] = techniqueName(s.technique);
    header["postprocessed"] = s.postprocessed;
    header["rows"] = s.rows();
    header["cols"] = s.cols();
    header["k"] = s.k();
    SizeReport rep = size(s);
    header["nonzeros"] = {{"ahat", rep.ahat}, {"u", rep.u}, {"m", rep.m}, {"v", rep.v}};

    std::filesystem::path base(dir);
    {
        std::ofstream out(base / "header.json");
        if (!out) throw IoError("cannot open '" + (base / "header.json").string() + "' for writing");
        out << header.dump(2) << "\n";
        if (!out) throw IoError("write failed for '" + (base / "header.json").string() + "'");
    }
    writeMatrixMarket((base / "ahat.mtx").string(), s.Ahat);
    writeMatrixMarket((base / "u.mtx").string(), s.U);
    writeMatrixMarket((base / "m.mtx").string(), s.M);
    writeMatrixMarket((base / "v.mtx").string(), s.V);
}

/// Load a bundle written by writeSparsification, checking the header
/// against the stored factors and re-running the structural checks.
inline Sparsification readSparsification(const std::string& dir) {
    std::filesystem::path base(dir);
    std::ifstream in(base / "header.json");
    if (!in) throw IoError("cannot open '" + (base / "header.json").string() + "'");
    nlohmann::json header;
    try {
        in >> header;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("invalid bundle header: " + std::string(e.what()));
    }
    if (!header.is_object() || !header.contains("schema_version") ||
        !header["schema_version"].is_number_integer())
        throw ParseError("bundle header missing schema_version");
    if (header["schema_version"].get<int>() != kBundleSchemaVersion)
        throw ParseError("unsupported bundle schema_version " +
                         header["schema_version"].dump());
    for (const char* key : {"technique", "postprocessed", "rows", "cols", "k"})
        if (!header.contains(key))
            throw ParseError(std::string("bundle header missing '") + key + "'");

    Sparsification s;
    s.technique = techniqueFromName(header["technique"].get<std::string>());
    s.postprocessed = header["postprocessed"].get<bool>();
    s.Ahat = readMatrixMarket<SpMatR>((base / "ahat.mtx").string());
    s.U = readMatrixMarket<SpMatR>((base / "u.mtx").string());
    s.M = readMatrixMarket<SpMatC>((base / "m.mtx").string());
    s.V = readMatrixMarket<SpMatC>((base / "v.mtx").string());

    if (s.rows() != header["rows"].get<Eigen::Index>() ||
        s.cols() != header["cols"].get<Eigen::Index>() || s.k() != header["k"].get<Eigen::Index>())
        throw ParseError("bundle factors disagree with header dimensions");
    try {
        validateSparsification(s);
    } catch (const ContractError& e) {
        throw ParseError("bundle factors are inconsistent: " + std::string(e.what()));
    }
    return s;
}

} // namespace kronriver
