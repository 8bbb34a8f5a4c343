#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "kronriver/cards.hpp"
#include "kronriver/errors.hpp"
#include "kronriver/kron.hpp"
#include "kronriver/skeleton.hpp"

namespace kronriver {

/// The reference betting abstraction: 1875 already contributed per
/// player, 18125 behind, one three-quarter-pot bet size in every
/// context, all-in available.
inline BettingConfig referenceBettingConfig() {
    BettingConfig cfg;
    cfg.stack1 = cfg.stack2 = 18125;
    cfg.potContribution = 1875;
    for (int c = 0; c < kBetContexts; ++c) {
        cfg.menu1[static_cast<size_t>(c)] = {0.75};
        cfg.menu2[static_cast<size_t>(c)] = {0.75};
    }
    cfg.allIn = true;
    return cfg;
}

/// Small example on the reference abstraction: three hands per side on
/// a dry board.
inline RiverInstance goldenInstance() {
    Board board = Board::fromCode("2c7d9hJc3s");
    std::vector<Hand> h1 = {Hand(Card::fromCode("Ac"), Card::fromCode("Ad")),
                            Hand(Card::fromCode("Kc"), Card::fromCode("Kd")),
                            Hand(Card::fromCode("5c"), Card::fromCode("5d"))};
    std::vector<Hand> h2 = {Hand(Card::fromCode("Ah"), Card::fromCode("As")),
                            Hand(Card::fromCode("Qc"), Card::fromCode("Qd")),
                            Hand(Card::fromCode("7c"), Card::fromCode("7h"))};
    return makeRiverInstance(board, std::move(h1), {0.5, 0.3, 0.2}, std::move(h2),
                             {0.4, 0.4, 0.2}, referenceBettingConfig());
}

/// Twenty-card river: ranks 2..6 in all suits, a paired low board, and
/// every one of the 105 remaining-card pairs in both ranges with
/// uniform beliefs.
inline RiverInstance twentyCardInstance() {
    Deck deck;
    for (int r = 2; r <= 6; ++r)
        for (int s = 0; s < 4; ++s) deck.cards.emplace_back(r, s);
    Board board = Board::fromCode("2c2d4h5s6c");

    std::vector<Card> rest;
    for (const Card& c : deck.cards) {
        bool onBoard = false;
        for (const Card& b : board.cards())
            if (b == c) onBoard = true;
        if (!onBoard) rest.push_back(c);
    }

    std::vector<Hand> hands;
    for (size_t i = 0; i < rest.size(); ++i)
        for (size_t j = i + 1; j < rest.size(); ++j) hands.emplace_back(rest[i], rest[j]);
    std::vector<double> weights(hands.size(), 1.0);
    return makeRiverInstance(board, hands, weights, hands, weights, referenceBettingConfig(),
                             deck);
}

/// Two-hand bluffing micro-game: player 1 holds the nuts or dead air
/// with equal probability, player 2 a single bluff-catcher; one
/// pot-sized bet is the only aggressive option.
inline RiverInstance bluffingInstance() {
    Board board = Board::fromCode("2c2d2h3c3d");
    BettingConfig cfg;
    cfg.stack1 = cfg.stack2 = 40;
    cfg.potContribution = 10;
    cfg.menu1[static_cast<size_t>(BetContext::FirstAction)] = {1.0};
    cfg.allIn = false;
    std::vector<Hand> h1 = {Hand(Card::fromCode("3h"), Card::fromCode("3s")),
                            Hand(Card::fromCode("4c"), Card::fromCode("5c"))};
    std::vector<Hand> h2 = {Hand(Card::fromCode("Ac"), Card::fromCode("Ad"))};
    return makeRiverInstance(board, std::move(h1), {0.5, 0.5}, std::move(h2), {1.0}, cfg);
}

/// Board plays for everyone: a royal flush on board makes every
/// showdown a tie, so no bet or fold can gain.
inline RiverInstance allTieInstance() {
    Board board = Board::fromCode("AsKsQsJsTs");
    BettingConfig cfg;
    cfg.stack1 = cfg.stack2 = 40;
    cfg.potContribution = 10;
    cfg.menu1[static_cast<size_t>(BetContext::FirstAction)] = {1.0};
    cfg.menu2[static_cast<size_t>(BetContext::FacingCheck)] = {1.0};
    cfg.allIn = false;
    std::vector<Hand> h1 = {Hand(Card::fromCode("2c"), Card::fromCode("3c")),
                            Hand(Card::fromCode("4d"), Card::fromCode("5d"))};
    std::vector<Hand> h2 = {Hand(Card::fromCode("2h"), Card::fromCode("3h")),
                            Hand(Card::fromCode("4h"), Card::fromCode("5h"))};
    return makeRiverInstance(board, std::move(h1), {0.5, 0.5}, std::move(h2), {0.5, 0.5}, cfg);
}

/// Random small instance for correctness sweeps: 12..20-card deck, up
/// to 12 hands per side, random beliefs, reference abstraction.
inline RiverInstance randomSmallInstance(std::mt19937_64& rng, int handsPerSide = 0) {
    Deck full = Deck::standard52();
    for (int attempt = 0; attempt < 100; ++attempt) {
        std::shuffle(full.cards.begin(), full.cards.end(), rng);
        int deckSize = std::uniform_int_distribution<int>(12, 20)(rng);
        Deck deck;
        deck.cards.assign(full.cards.begin(), full.cards.begin() + deckSize);

        Board board({deck.cards[0], deck.cards[1], deck.cards[2], deck.cards[3], deck.cards[4]});
        std::vector<Card> rest(deck.cards.begin() + 5, deck.cards.end());
        std::vector<Hand> pairs;
        for (size_t i = 0; i < rest.size(); ++i)
            for (size_t j = i + 1; j < rest.size(); ++j) pairs.emplace_back(rest[i], rest[j]);

        auto draw = [&](int count) {
            std::vector<Hand> pool = pairs;
            std::shuffle(pool.begin(), pool.end(), rng);
            pool.resize(static_cast<size_t>(count));
            return pool;
        };
        int maxHands = std::min<int>(12, static_cast<int>(pairs.size()));
        if (handsPerSide > maxHands) continue;
        auto drawCount = [&] {
            return handsPerSide > 0 ? handsPerSide
                                    : std::uniform_int_distribution<int>(2, maxHands)(rng);
        };
        std::vector<Hand> h1 = draw(drawCount());
        std::vector<Hand> h2 = draw(drawCount());

        bool compatiblePair = false;
        for (const Hand& a : h1)
            for (const Hand& b : h2)
                if (!a.overlaps(b)) compatiblePair = true;
        if (!compatiblePair) continue;

        std::uniform_real_distribution<double> weight(0.1, 1.0);
        std::vector<double> w1, w2;
        for (size_t i = 0; i < h1.size(); ++i) w1.push_back(weight(rng));
        for (size_t i = 0; i < h2.size(); ++i) w2.push_back(weight(rng));
        return makeRiverInstance(board, std::move(h1), std::move(w1), std::move(h2),
                                 std::move(w2), referenceBettingConfig(), deck);
    }
    throw InvalidInputError("failed to draw a usable random instance");
}

/// Synthetic benchmark instance: full deck, the two ranges drawn from
/// nearly disjoint card pools that share only `sharedCards` cards, so
/// cross-range blockers stay rare and hand strengths interleave
/// cleanly. This is the regime where the factored forms shine.
/// Synthetic sizing instance: both ranges drawn from card pools that
/// share `sharedCards` cards. Shared cards put card-removal holes in
/// the sorted-strength staircase of W, which fragments the rectangle
/// cover; the default keeps the pools disjoint so the staircase stays
/// clean, matching the regime where factoring pays off.
inline RiverInstance benchInstance(std::uint64_t seed, int handsPerSide, int sharedCards = 0) {
    if (handsPerSide < 1) throw InvalidInputError("handsPerSide must be positive");
    if (sharedCards < 0 || sharedCards > 40)
        throw InvalidInputError("sharedCards out of range");
    std::mt19937_64 rng(seed);
    Deck deck = Deck::standard52();
    std::shuffle(deck.cards.begin(), deck.cards.end(), rng);

    Board board({deck.cards[0], deck.cards[1], deck.cards[2], deck.cards[3], deck.cards[4]});
    std::vector<Card> rest(deck.cards.begin() + 5, deck.cards.end());
    std::vector<Card> shared(rest.begin(), rest.begin() + sharedCards);
    size_t half = (rest.size() - static_cast<size_t>(sharedCards)) / 2;
    std::vector<Card> pool1(rest.begin() + sharedCards, rest.begin() + sharedCards + half);
    std::vector<Card> pool2(rest.begin() + sharedCards + half, rest.end());
    pool1.insert(pool1.end(), shared.begin(), shared.end());
    pool2.insert(pool2.end(), shared.begin(), shared.end());

    auto drawHands = [&](const std::vector<Card>& pool) {
        std::vector<Hand> pairs;
        for (size_t i = 0; i < pool.size(); ++i)
            for (size_t j = i + 1; j < pool.size(); ++j) pairs.emplace_back(pool[i], pool[j]);
        if (pairs.size() < static_cast<size_t>(handsPerSide))
            throw InvalidInputError("pool too small for the requested hand count");
        std::shuffle(pairs.begin(), pairs.end(), rng);
        pairs.resize(static_cast<size_t>(handsPerSide));
        return pairs;
    };
    std::vector<Hand> h1 = drawHands(pool1);
    std::vector<Hand> h2 = drawHands(pool2);
    std::uniform_real_distribution<double> weight(0.25, 1.0);
    std::vector<double> w1, w2;
    for (int i = 0; i < handsPerSide; ++i) w1.push_back(weight(rng));
    for (int i = 0; i < handsPerSide; ++i) w2.push_back(weight(rng));
    return makeRiverInstance(board, std::move(h1), std::move(w1), std::move(h2), std::move(w2),
                             referenceBettingConfig());
}

} // namespace kronriver
