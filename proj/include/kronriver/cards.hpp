#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "kronriver/errors.hpp"

namespace kronriver {

/// A playing card. Ranks run 2..14 (ace high), suits are indexed
/// c=0, d=1, h=2, s=3. Cards order by rank first, suit second.
class Card {
public:
    Card() : rank_(2), suit_(0) {}
    Card(int rank, int suit) : rank_(static_cast<int8_t>(rank)), suit_(static_cast<int8_t>(suit)) {
        if (rank < 2 || rank > 14 || suit < 0 || suit > 3)
            throw InvalidInputError("card out of range: rank=" + std::to_string(rank) +
                                    " suit=" + std::to_string(suit));
    }

    int rank() const noexcept { return rank_; }
    int suit() const noexcept { return suit_; }

    /// Dense id in [0, 52): used for bitmask bookkeeping and hashing.
    int id() const noexcept { return (rank_ - 2) * 4 + suit_; }

    /// Two-character code like "As", "Td", "2c".
    std::string code() const {
        static constexpr char kRanks[] = "23456789TJQKA";
        static constexpr char kSuits[] = "cdhs";
        return {kRanks[rank_ - 2], kSuits[suit_]};
    }

    static Card fromCode(std::string_view code) {
        if (code.size() != 2)
            throw InvalidInputError("bad card code '" + std::string(code) + "'");
        static constexpr std::string_view kRanks = "23456789TJQKA";
        static constexpr std::string_view kSuits = "cdhs";
        auto r = kRanks.find(code[0]);
        auto s = kSuits.find(code[1]);
        if (r == std::string_view::npos || s == std::string_view::npos)
            throw InvalidInputError("bad card code '" + std::string(code) + "'");
        return Card(static_cast<int>(r) + 2, static_cast<int>(s));
    }

    friend auto operator<=>(const Card&, const Card&) = default;

private:
    int8_t rank_;
    int8_t suit_;
};

/// An unordered two-card holding, stored canonically with the higher
/// card first ("higher" by rank, then suit index).
class Hand {
public:
    Hand() = default;
    Hand(Card a, Card b) {
        if (a == b) throw InvalidInputError("hand repeats card " + a.code());
        if (a < b) std::swap(a, b);
        high_ = a;
        low_ = b;
    }

    const Card& high() const noexcept { return high_; }
    const Card& low() const noexcept { return low_; }

    bool contains(Card c) const noexcept { return c == high_ || c == low_; }
    bool overlaps(const Hand& o) const noexcept {
        return contains(o.high_) || contains(o.low_);
    }

    /// Canonical four-character code, e.g. "AsAh".
    std::string code() const { return high_.code() + low_.code(); }

    static Hand fromCode(std::string_view code) {
        if (code.size() != 4)
            throw InvalidInputError("bad hand code '" + std::string(code) + "'");
        return Hand(Card::fromCode(code.substr(0, 2)), Card::fromCode(code.substr(2, 2)));
    }

    /// Dense key for hashing: high.id()*52 + low.id().
    int key() const noexcept { return high_.id() * 52 + low_.id(); }

    friend auto operator<=>(const Hand&, const Hand&) = default;

private:
    Card high_;
    Card low_;
};

/// Five community cards. Order is preserved as given; the cards must
/// be pairwise distinct.
class Board {
public:
    Board() = default;
    explicit Board(std::array<Card, 5> cards) : cards_(cards) {
        for (int i = 0; i < 5; ++i)
            for (int j = i + 1; j < 5; ++j)
                if (cards_[i] == cards_[j])
                    throw InvalidInputError("board repeats card " + cards_[i].code());
    }

    const Card& operator[](int i) const { return cards_[static_cast<size_t>(i)]; }
    const std::array<Card, 5>& cards() const noexcept { return cards_; }

    bool contains(Card c) const noexcept {
        return std::find(cards_.begin(), cards_.end(), c) != cards_.end();
    }
    bool overlaps(const Hand& h) const noexcept {
        return contains(h.high()) || contains(h.low());
    }

    std::string code() const {
        std::string out;
        for (const Card& c : cards_) out += c.code();
        return out;
    }

    static Board fromCode(std::string_view code) {
        if (code.size() != 10)
            throw InvalidInputError("bad board code '" + std::string(code) + "'");
        std::array<Card, 5> cs;
        for (int i = 0; i < 5; ++i) cs[static_cast<size_t>(i)] = Card::fromCode(code.substr(static_cast<size_t>(2 * i), 2));
        return Board(cs);
    }

    friend bool operator==(const Board&, const Board&) = default;

private:
    std::array<Card, 5> cards_{};
};

/// A deck is just the set of cards an instance may use. Reduced decks
/// (any subset of the 52) are first-class.
struct Deck {
    std::vector<Card> cards;

    static Deck standard52() {
        Deck d;
        d.cards.reserve(52);
        for (int r = 2; r <= 14; ++r)
            for (int s = 0; s < 4; ++s) d.cards.emplace_back(r, s);
        return d;
    }

    bool contains(Card c) const {
        return std::find(cards.begin(), cards.end(), c) != cards.end();
    }

    void validate() const {
        for (size_t i = 0; i < cards.size(); ++i)
            for (size_t j = i + 1; j < cards.size(); ++j)
                if (cards[i] == cards[j])
                    throw InvalidInputError("deck repeats card " + cards[i].code());
    }
};

/// Strength of a seven-card holding, packed so that integer comparison
/// matches hand comparison: category in the top nibble-group, then the
/// five tie-break ranks, four bits each.
class HandRank {
public:
    enum Category : int {
        HighCard = 0,
        Pair = 1,
        TwoPair = 2,
        Trips = 3,
        Straight = 4,
        Flush = 5,
        FullHouse = 6,
        Quads = 7,
        StraightFlush = 8,
    };

    HandRank() : key_(0) {}
    HandRank(Category cat, int a, int b = 0, int c = 0, int d = 0, int e = 0)
        : key_((static_cast<uint32_t>(cat) << 20) | (static_cast<uint32_t>(a) << 16) |
               (static_cast<uint32_t>(b) << 12) | (static_cast<uint32_t>(c) << 8) |
               (static_cast<uint32_t>(d) << 4) | static_cast<uint32_t>(e)) {}

    uint32_t key() const noexcept { return key_; }
    Category category() const noexcept { return static_cast<Category>(key_ >> 20); }

    friend auto operator<=>(const HandRank&, const HandRank&) = default;

private:
    uint32_t key_;
};

namespace detail {

/// Highest top rank of a five-card run present in the rank bitmask,
/// including the wheel (A-5), or 0 if none.
inline int straightTop(uint32_t rankMask) {
    for (int top = 14; top >= 6; --top) {
        uint32_t run = 0x1Fu << (top - 4);
        if ((rankMask & run) == run) return top;
    }
    constexpr uint32_t kWheel = (1u << 14) | (1u << 5) | (1u << 4) | (1u << 3) | (1u << 2);
    if ((rankMask & kWheel) == kWheel) return 5;
    return 0;
}

inline void topRanks(uint32_t mask, int exclude1, int exclude2, int want, int* out) {
    int got = 0;
    for (int r = 14; r >= 2 && got < want; --r) {
        if (r == exclude1 || r == exclude2) continue;
        if (mask & (1u << r)) out[got++] = r;
    }
    while (got < want) out[got++] = 0;
}

} // namespace detail

/// Rank the best five-card hand out of a holding plus the board.
/// The seven cards must be pairwise distinct.
inline HandRank evaluate7(const Hand& hand, const Board& board) {
    std::array<Card, 7> cs = {hand.high(), hand.low(),
                              board[0], board[1], board[2], board[3], board[4]};
    uint64_t seen = 0;
    for (const Card& c : cs) {
        uint64_t bit = 1ull << c.id();
        if (seen & bit)
            throw InvalidInputError("hand shares card " + c.code() + " with board");
        seen |= bit;
    }

    int rankCnt[15] = {};
    int suitCnt[4] = {};
    uint32_t suitMask[4] = {};
    uint32_t rankMask = 0;
    for (const Card& c : cs) {
        ++rankCnt[c.rank()];
        ++suitCnt[c.suit()];
        suitMask[c.suit()] |= 1u << c.rank();
        rankMask |= 1u << c.rank();
    }

    int flushSuit = -1;
    for (int s = 0; s < 4; ++s)
        if (suitCnt[s] >= 5) flushSuit = s;

    if (flushSuit >= 0) {
        if (int st = detail::straightTop(suitMask[flushSuit]); st > 0)
            return HandRank(HandRank::StraightFlush, st);
    }

    int quad = 0, trip1 = 0, trip2 = 0, pair1 = 0, pair2 = 0;
    for (int r = 14; r >= 2; --r) {
        switch (rankCnt[r]) {
            case 4: quad = r; break;
            case 3:
                if (!trip1) trip1 = r;
                else if (!trip2) trip2 = r;
                break;
            case 2:
                if (!pair1) pair1 = r;
                else if (!pair2) pair2 = r;
                break;
            default: break;
        }
    }

    if (quad) {
        int k[1];
        detail::topRanks(rankMask, quad, 0, 1, k);
        return HandRank(HandRank::Quads, quad, k[0]);
    }
    if (trip1 && (trip2 || pair1)) {
        int fill = trip2 > pair1 ? trip2 : pair1;
        return HandRank(HandRank::FullHouse, trip1, fill);
    }
    if (flushSuit >= 0) {
        int k[5];
        detail::topRanks(suitMask[flushSuit], 0, 0, 5, k);
        return HandRank(HandRank::Flush, k[0], k[1], k[2], k[3], k[4]);
    }
    if (int st = detail::straightTop(rankMask); st > 0)
        return HandRank(HandRank::Straight, st);
    if (trip1) {
        int k[2];
        detail::topRanks(rankMask, trip1, 0, 2, k);
        return HandRank(HandRank::Trips, trip1, k[0], k[1]);
    }
    if (pair1 && pair2) {
        int k[1];
        detail::topRanks(rankMask, pair1, pair2, 1, k);
        return HandRank(HandRank::TwoPair, pair1, pair2, k[0]);
    }
    if (pair1) {
        int k[3];
        detail::topRanks(rankMask, pair1, 0, 3, k);
        return HandRank(HandRank::Pair, pair1, k[0], k[1], k[2]);
    }
    int k[5];
    detail::topRanks(rankMask, 0, 0, 5, k);
    return HandRank(HandRank::HighCard, k[0], k[1], k[2], k[3], k[4]);
}

/// Showdown sign for the pair of holdings: +1 if h1 wins, -1 if h2
/// wins, 0 on a chop or when the hands block each other.
inline int gamma(const Hand& h1, const Hand& h2, const Board& board) {
    if (board.overlaps(h1))
        throw InvalidInputError("hand " + h1.code() + " shares a card with the board");
    if (board.overlaps(h2))
        throw InvalidInputError("hand " + h2.code() + " shares a card with the board");
    if (h1.overlaps(h2)) return 0;
    HandRank r1 = evaluate7(h1, board);
    HandRank r2 = evaluate7(h2, board);
    if (r1 > r2) return 1;
    if (r1 < r2) return -1;
    return 0;
}

/// True when the two holdings can coexist (no shared card). Each hand
/// must itself be disjoint from the board.
inline bool compatible(const Hand& h1, const Hand& h2, const Board& board) {
    if (board.overlaps(h1))
        throw InvalidInputError("hand " + h1.code() + " shares a card with the board");
    if (board.overlaps(h2))
        throw InvalidInputError("hand " + h2.code() + " shares a card with the board");
    return !h1.overlaps(h2);
}

} // namespace kronriver
