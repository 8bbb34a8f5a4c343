#pragma once

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kronriver/cards.hpp"
#include "kronriver/errors.hpp"
#include "kronriver/kron.hpp"
#include "kronriver/skeleton.hpp"

namespace kronriver {

inline constexpr int kInstanceSchemaVersion = 1;

namespace detail {

inline const nlohmann::json& field(const nlohmann::json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end()) throw ParseError(std::string("missing field '") + name + "'");
    return *it;
}

inline double numberField(const nlohmann::json& j, const char* name) {
    const nlohmann::json& v = field(j, name);
    if (!v.is_number()) throw ParseError(std::string("field '") + name + "' must be a number");
    return v.get<double>();
}

inline Card cardField(const nlohmann::json& v, const char* where) {
    if (!v.is_string())
        throw ParseError(std::string("card in ") + where + " must be a string code");
    try {
        return Card::fromCode(v.get<std::string>());
    } catch (const Error& e) {
        throw ParseError(std::string(where) + ": " + e.what());
    }
}

inline std::vector<double> fractionList(const nlohmann::json& v, const std::string& where) {
    if (!v.is_array()) throw ParseError(where + " must be an array of fractions");
    std::vector<double> out;
    for (const auto& f : v) {
        if (!f.is_number()) throw ParseError(where + " must contain numbers only");
        out.push_back(f.get<double>());
    }
    return out;
}

} // namespace detail

inline nlohmann::json instanceToJson(const RiverInstance& inst) {
    nlohmann::json j;
    j["schema_version"] = kInstanceSchemaVersion;

    if (inst.deck.cards == Deck::standard52().cards) {
        j["deck"] = "standard52";
    } else {
        nlohmann::json deck = nlohmann::json::array();
        for (const Card& c : inst.deck.cards) deck.push_back(c.code());
        j["deck"] = deck;
    }

    nlohmann::json board = nlohmann::json::array();
    for (const Card& c : inst.board.cards()) board.push_back(c.code());
    j["board"] = board;

    j["stacks"] = {inst.config.stack1, inst.config.stack2};
    j["pot_contribution"] = inst.config.potContribution;

    nlohmann::json beliefs = nlohmann::json::array();
    for (int p = 0; p < 2; ++p) {
        nlohmann::json side = nlohmann::json::object();
        const auto& hands = inst.hands[static_cast<size_t>(p)];
        const auto& weights = inst.beliefs[static_cast<size_t>(p)];
        for (size_t i = 0; i < hands.size(); ++i) side[hands[i].code()] = weights[i];
        beliefs.push_back(side);
    }
    j["beliefs"] = beliefs;

    nlohmann::json betting;
    betting["all_in"] = inst.config.allIn;
    if (inst.config.raiseCap)
        betting["raise_cap"] = *inst.config.raiseCap;
    else
        betting["raise_cap"] = nullptr;
    nlohmann::json menus = nlohmann::json::array();
    for (int p = 0; p < 2; ++p) {
        nlohmann::json menu = nlohmann::json::object();
        const auto& m = p == 0 ? inst.config.menu1 : inst.config.menu2;
        for (int c = 0; c < kBetContexts; ++c)
            menu[betContextName(static_cast<BetContext>(c))] = m[static_cast<size_t>(c)];
        menus.push_back(menu);
    }
    betting["menus"] = menus;
    j["betting"] = betting;
    return j;
}

inline RiverInstance instanceFromJson(const nlohmann::json& j) {
    using detail::cardField;
    using detail::field;

    if (!j.is_object()) throw ParseError("instance file must hold a JSON object");
    const nlohmann::json& version = field(j, "schema_version");
    if (!version.is_number_integer() || version.get<int>() != kInstanceSchemaVersion)
        throw ParseError("unsupported schema_version");

    Deck deck;
    const nlohmann::json& deckSpec = field(j, "deck");
    if (deckSpec.is_string()) {
        if (deckSpec.get<std::string>() != "standard52")
            throw ParseError("deck must be \"standard52\" or an explicit card list");
        deck = Deck::standard52();
    } else if (deckSpec.is_array()) {
        for (const auto& c : deckSpec) deck.cards.push_back(cardField(c, "deck"));
        try {
            deck.validate();
        } catch (const Error& e) {
            throw ParseError(std::string("deck: ") + e.what());
        }
    } else {
        throw ParseError("deck must be \"standard52\" or an explicit card list");
    }

    const nlohmann::json& boardSpec = field(j, "board");
    if (!boardSpec.is_array() || boardSpec.size() != 5)
        throw ParseError("board must list exactly 5 card codes");
    std::array<Card, 5> boardCards;
    for (size_t i = 0; i < 5; ++i) boardCards[i] = cardField(boardSpec[i], "board");
    Board board(boardCards);

    const nlohmann::json& stacks = field(j, "stacks");
    if (!stacks.is_array() || stacks.size() != 2 || !stacks[0].is_number() ||
        !stacks[1].is_number())
        throw ParseError("stacks must be a pair of numbers");

    BettingConfig cfg;
    cfg.stack1 = stacks[0].get<double>();
    cfg.stack2 = stacks[1].get<double>();
    cfg.potContribution = detail::numberField(j, "pot_contribution");

    const nlohmann::json& beliefs = field(j, "beliefs");
    if (!beliefs.is_array() || beliefs.size() != 2)
        throw ParseError("beliefs must be an array with one map per player");
    std::array<std::vector<Hand>, 2> hands;
    std::array<std::vector<double>, 2> weights;
    for (size_t p = 0; p < 2; ++p) {
        if (!beliefs[p].is_object())
            throw ParseError("beliefs[" + std::to_string(p) + "] must map hand codes to weights");
        std::map<std::uint32_t, Hand> seen;
        for (const auto& [code, weight] : beliefs[p].items()) {
            if (code.size() != 4)
                throw ParseError("beliefs[" + std::to_string(p) + "] key '" + code +
                                 "' is not a two-card code");
            Hand hand;
            try {
                hand = Hand::fromCode(code);
            } catch (const Error& e) {
                throw ParseError("beliefs[" + std::to_string(p) + "]: " + e.what());
            }
            if (!weight.is_number())
                throw ParseError("beliefs[" + std::to_string(p) + "][" + code +
                                 "] must be a number");
            if (!seen.emplace(hand.key(), hand).second)
                throw ParseError("beliefs[" + std::to_string(p) + "] repeats hand " +
                                 hand.code());
            hands[p].push_back(hand);
            weights[p].push_back(weight.get<double>());
        }
        if (hands[p].empty())
            throw ParseError("beliefs[" + std::to_string(p) + "] must not be empty");
    }

    const nlohmann::json& betting = field(j, "betting");
    const nlohmann::json& allIn = field(betting, "all_in");
    if (!allIn.is_boolean()) throw ParseError("betting.all_in must be a boolean");
    cfg.allIn = allIn.get<bool>();
    const nlohmann::json& raiseCap = field(betting, "raise_cap");
    if (raiseCap.is_number_integer())
        cfg.raiseCap = raiseCap.get<int>();
    else if (!raiseCap.is_null())
        throw ParseError("betting.raise_cap must be an integer or null");
    const nlohmann::json& menus = field(betting, "menus");
    if (!menus.is_array() || menus.size() != 2)
        throw ParseError("betting.menus must hold one menu set per player");
    for (size_t p = 0; p < 2; ++p) {
        auto& m = p == 0 ? cfg.menu1 : cfg.menu2;
        if (!menus[p].is_object()) throw ParseError("betting.menus entries must be objects");
        for (int c = 0; c < kBetContexts; ++c) {
            const char* name = betContextName(static_cast<BetContext>(c));
            auto it = menus[p].find(name);
            if (it == menus[p].end()) continue;
            m[static_cast<size_t>(c)] = detail::fractionList(
                *it, "betting.menus[" + std::to_string(p) + "]." + name);
        }
        for (const auto& [key, value] : menus[p].items()) {
            bool known = false;
            for (int c = 0; c < kBetContexts; ++c)
                if (key == betContextName(static_cast<BetContext>(c))) known = true;
            if (!known)
                throw ParseError("betting.menus[" + std::to_string(p) +
                                 "] has unknown context '" + key + "'");
        }
    }

    RiverInstance inst;
    try {
        inst = makeRiverInstance(board, std::move(hands[0]), std::move(weights[0]),
                                 std::move(hands[1]), std::move(weights[1]), cfg,
                                 std::move(deck));
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError(e.what());
    }

    double beta = 0;
    for (size_t i = 0; i < inst.hands[0].size(); ++i)
        for (size_t k = 0; k < inst.hands[1].size(); ++k)
            if (!inst.hands[0][i].overlaps(inst.hands[1][k]))
                beta += inst.beliefs[0][i] * inst.beliefs[1][k];
    if (!(beta > 0))
        throw ParseError("beliefs are degenerate: no compatible hand pair has positive weight");
    return inst;
}

inline void writeInstance(const RiverInstance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << instanceToJson(inst).dump(2) << '\n';
}

inline RiverInstance readInstance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid JSON in '") + path + "': " + e.what());
    }
    return instanceFromJson(j);
}

} // namespace kronriver
