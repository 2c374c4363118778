#include "causal/order.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "causal/errors.hpp"

namespace causal {

Relation inverse(Relation r) {
    switch (r) {
        case Relation::Precedes: return Relation::Follows;
        case Relation::Follows: return Relation::Precedes;
        default: return r;
    }
}

char symbol(Relation r) {
    switch (r) {
        case Relation::Precedes: return '<';
        case Relation::Follows: return '>';
        case Relation::Simultaneous: return '~';
        case Relation::Incomparable: return '|';
    }
    return '?';
}

CausalOrder::CausalOrder(std::size_t n) : n_(n), rel_(n * n, Relation::Incomparable) {
    for (std::size_t i = 0; i < n; ++i) rel_[i * n + i] = Relation::Simultaneous;
}

CausalOrder CausalOrder::from_table(std::size_t n, std::vector<Relation> table) {
    require(table.size() == n * n, "relation table must have n*n entries");
    CausalOrder o;
    o.n_ = n;
    o.rel_ = std::move(table);
    return o;
}

void CausalOrder::relate(std::size_t a, std::size_t b, Relation r) {
    require(a < n_ && b < n_ && a != b, "relate() needs two distinct events in range");
    rel_[a * n_ + b] = r;
    rel_[b * n_ + a] = inverse(r);
}

CausalOrder CausalOrder::relabeled(std::span<const std::size_t> perm) const {
    require(perm.size() == n_, "permutation size mismatch");
    CausalOrder out(n_);
    for (std::size_t a = 0; a < n_; ++a)
        for (std::size_t b = 0; b < n_; ++b) out.rel_[perm[a] * n_ + perm[b]] = relation(a, b);
    return out;
}

std::string CausalOrder::to_string() const {
    std::ostringstream os;
    os << '{';
    bool first = true;
    for (std::size_t a = 0; a < n_; ++a) {
        for (std::size_t b = a + 1; b < n_; ++b) {
            if (!first) os << ", ";
            first = false;
            const Relation r = relation(a, b);
            if (r == Relation::Follows)
                os << b << '<' << a;
            else
                os << a << symbol(r) << b;
        }
    }
    os << '}';
    return os.str();
}

bool validate_order(const CausalOrder& order) {
    const std::size_t n = order.size();
    for (std::size_t a = 0; a < n; ++a) {
        const Relation self = order.relation(a, a);
        if (self == Relation::Precedes || self == Relation::Follows) return false;
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b) continue;
            if (order.relation(b, a) != inverse(order.relation(a, b))) return false;
        }
    }
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b) continue;
            const Relation ab = order.relation(a, b);
            if (ab != Relation::Precedes && ab != Relation::Simultaneous) continue;
            for (std::size_t c = 0; c < n; ++c) {
                if (c == a || c == b) continue;
                const Relation bc = order.relation(b, c);
                if (ab == Relation::Precedes && bc == Relation::Precedes && !order.precedes(a, c)) return false;
                if (ab == Relation::Simultaneous && bc == Relation::Simultaneous &&
                    order.relation(a, c) != Relation::Simultaneous)
                    return false;
            }
        }
    }
    return true;
}

Outcome Outcome::at(double t) {
    require(std::isfinite(t) && t >= 0.0, "detection times must be finite and non-negative");
    Outcome o;
    o.time_ = t;
    return o;
}

CausalOrder classify_outcomes(std::span<const Outcome> outcomes) {
    const std::size_t n = outcomes.size();
    CausalOrder order(n);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            const Outcome& oa = outcomes[a];
            const Outcome& ob = outcomes[b];
            Relation r = Relation::Incomparable;
            if (oa.detected() && ob.detected()) {
                if (oa.time() < ob.time())
                    r = Relation::Precedes;
                else if (ob.time() < oa.time())
                    r = Relation::Follows;
                else
                    r = Relation::Simultaneous;
            } else if (oa.detected()) {
                r = Relation::Precedes;
            } else if (ob.detected()) {
                r = Relation::Follows;
            }
            order.relate(a, b, r);
        }
    }
    return order;
}

std::set<CausalOrder> enumerate_reachable_orders(std::size_t n) {
    if (n < 1 || n > kMaxEnumeratedEvents)
        throw SizeLimitError("enumerate_reachable_orders supports 1 <= n <= " +
                             std::to_string(kMaxEnumeratedEvents));
    // Each event gets a label in 0..n: a time rank 0..n-1 or n for no detection.
    std::vector<std::size_t> label(n, 0);
    std::vector<Outcome> outcomes(n);
    std::set<CausalOrder> found;
    while (true) {
        for (std::size_t i = 0; i < n; ++i)
            outcomes[i] = label[i] == n ? Outcome::none() : Outcome::at(static_cast<double>(label[i]));
        found.insert(classify_outcomes(outcomes));
        std::size_t pos = 0;
        while (pos < n && ++label[pos] > n) label[pos++] = 0;
        if (pos == n) break;
    }
    return found;
}

namespace two_event {

namespace {
CausalOrder pair(Relation r) {
    CausalOrder o(2);
    o.relate(0, 1, r);
    return o;
}
}  // namespace

CausalOrder m1() { return pair(Relation::Precedes); }
CausalOrder m2() { return pair(Relation::Follows); }
CausalOrder m3() { return pair(Relation::Incomparable); }
CausalOrder m4() { return pair(Relation::Simultaneous); }

}  // namespace two_event

void OrderDistribution::set(const CausalOrder& order, double p, std::optional<double> std_error) {
    require(std::isfinite(p) && p >= 0.0 && p <= 1.0, "order probability must lie in [0, 1]");
    entries_[order] = OrderProbability{p, std_error, std::nullopt};
}

double OrderDistribution::probability(const CausalOrder& order) const {
    auto it = entries_.find(order);
    return it == entries_.end() ? 0.0 : it->second.probability;
}

std::optional<double> OrderDistribution::std_error(const CausalOrder& order) const {
    auto it = entries_.find(order);
    if (it == entries_.end()) return samples_ > 0 ? std::optional<double>(0.0) : std::nullopt;
    return it->second.std_error;
}

double OrderDistribution::total() const {
    double s = 0.0;
    for (const auto& [order, e] : entries_) s += e.probability;
    return s;
}

void OrderCounter::add(const CausalOrder& order, std::uint64_t k) {
    counts_[order] += k;
    total_ += k;
}

void OrderCounter::merge(const OrderCounter& other) {
    for (const auto& [order, k] : other.counts_) counts_[order] += k;
    total_ += other.total_;
}

std::uint64_t OrderCounter::count(const CausalOrder& order) const {
    auto it = counts_.find(order);
    return it == counts_.end() ? 0 : it->second;
}

OrderDistribution OrderCounter::distribution() const {
    require(total_ > 0, "cannot build a distribution from zero samples");
    OrderDistribution d;
    d.samples_ = total_;
    const double n = static_cast<double>(total_);
    for (const auto& [order, k] : counts_) {
        const double p = static_cast<double>(k) / n;
        d.entries_[order] = OrderProbability{p, std::sqrt(p * (1.0 - p) / n), k};
    }
    return d;
}

OrderDistribution aggregate(std::span<const OutcomeVector> samples) {
    if (samples.empty()) throw ParameterError("aggregate() needs at least one sample");
    OrderCounter counter;
    for (const auto& v : samples) counter.add(v);
    return counter.distribution();
}

}  // namespace causal
