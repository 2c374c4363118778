#pragma once

// Events, causal orders and the classification of detection outcomes.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace causal {

struct EventId {
    std::size_t index = 0;
    auto operator<=>(const EventId&) const = default;
};

enum class Relation : std::uint8_t { Precedes, Follows, Simultaneous, Incomparable };

Relation inverse(Relation r);
char symbol(Relation r);

// Pairwise relation table over events 0..n-1. The table is the canonical form:
// two orders compare equal iff their tables are equal, so orders can key maps.
class CausalOrder {
public:
    CausalOrder() = default;
    // All pairs Incomparable.
    explicit CausalOrder(std::size_t n);

    // Raw table in row-major order (n*n), diagonal included. No consistency
    // checks: see validate_order().
    static CausalOrder from_table(std::size_t n, std::vector<Relation> table);

    std::size_t size() const { return n_; }
    Relation relation(std::size_t a, std::size_t b) const { return rel_[a * n_ + b]; }
    bool precedes(std::size_t a, std::size_t b) const { return relation(a, b) == Relation::Precedes; }

    // Sets rel[a][b] = r and rel[b][a] = inverse(r).
    void relate(std::size_t a, std::size_t b, Relation r);
    // Sets rel[a][b] only.
    void set_raw(std::size_t a, std::size_t b, Relation r) { rel_[a * n_ + b] = r; }

    // Image under event relabelling: event i becomes perm[i].
    CausalOrder relabeled(std::span<const std::size_t> perm) const;

    // Human-readable form, e.g. "{0<1, 0<2, 1~2}" listing pairs a<b.
    std::string to_string() const;

    auto operator<=>(const CausalOrder&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<Relation> rel_;
};

// Irreflexivity, asymmetry (Precedes/Follows are mutual inverses, Simultaneous
// and Incomparable symmetric), transitivity of Precedes, and Simultaneous
// being an equivalence relation.
bool validate_order(const CausalOrder& order);

// One detector's outcome: a detection time or no detection.
class Outcome {
public:
    static Outcome at(double t);
    static Outcome none() { return Outcome{}; }

    bool detected() const { return time_.has_value(); }
    double time() const { return *time_; }
    const std::optional<double>& maybe_time() const { return time_; }

    auto operator<=>(const Outcome&) const = default;

private:
    std::optional<double> time_;
};

using OutcomeVector = std::vector<Outcome>;

// Detected events are ordered by time (exactly equal times are Simultaneous);
// every detected event precedes every undetected one; undetected events are
// mutually Incomparable.
CausalOrder classify_outcomes(std::span<const Outcome> outcomes);

inline constexpr std::size_t kMaxEnumeratedEvents = 6;

// Every order produced by classify_outcomes() for n events, found by
// exhausting all detection patterns and time rankings. 1 <= n <= 6.
std::set<CausalOrder> enumerate_reachable_orders(std::size_t n);

// Named orders for two events.
namespace two_event {
CausalOrder m1();  // 0 precedes 1
CausalOrder m2();  // 1 precedes 0
CausalOrder m3();  // incomparable (neither detected)
CausalOrder m4();  // simultaneous
}  // namespace two_event

struct OrderProbability {
    double probability = 0.0;
    std::optional<double> std_error;
    std::optional<std::uint64_t> count;
};

class OrderDistribution {
public:
    void set(const CausalOrder& order, double p, std::optional<double> std_error = std::nullopt);

    // 0 for orders that never occurred.
    double probability(const CausalOrder& order) const;
    std::optional<double> std_error(const CausalOrder& order) const;

    const std::map<CausalOrder, OrderProbability>& entries() const { return entries_; }
    double total() const;
    // Number of samples behind an empirical distribution; 0 for analytic ones.
    std::uint64_t samples() const { return samples_; }
    bool empty() const { return entries_.empty(); }

private:
    friend class OrderCounter;
    std::map<CausalOrder, OrderProbability> entries_;
    std::uint64_t samples_ = 0;
};

// Integer tallies of classified samples. Merging counters is associative and
// exact, which keeps chunked Monte Carlo runs reproducible.
class OrderCounter {
public:
    void add(const CausalOrder& order, std::uint64_t k = 1);
    void add(std::span<const Outcome> outcomes) { add(classify_outcomes(outcomes)); }
    void merge(const OrderCounter& other);

    std::uint64_t total() const { return total_; }
    std::uint64_t count(const CausalOrder& order) const;
    const std::map<CausalOrder, std::uint64_t>& counts() const { return counts_; }

    // Frequencies count/total with binomial standard errors sqrt(p(1-p)/N).
    OrderDistribution distribution() const;

private:
    std::map<CausalOrder, std::uint64_t> counts_;
    std::uint64_t total_ = 0;
};

// Empirical distribution of classified samples. Throws ParameterError when empty.
OrderDistribution aggregate(std::span<const OutcomeVector> samples);

}  // namespace causal
