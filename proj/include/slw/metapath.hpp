#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "slw/graph_store.hpp"
#include "slw/kg.hpp"

namespace slw {

enum class Granularity : std::uint8_t { Low, High };
enum class Slot : std::uint8_t { Source = 0, Relation = 1, Target = 2 };

/// Three-slot granularity pattern such as "H-H-L" (source, relation, target).
struct Pattern {
    std::array<Granularity, 3> levels{Granularity::Low, Granularity::Low, Granularity::Low};

    static Pattern parse(std::string_view text);  // throws std::invalid_argument
    static Pattern from_bits(unsigned high_mask);  // bit i set => slot i High
    unsigned high_mask() const;
    std::string str() const;
    int low_count() const;
    Granularity operator[](Slot s) const { return levels[static_cast<std::size_t>(s)]; }
    Pattern with(Slot s, Granularity g) const;

    auto operator<=>(const Pattern&) const = default;
};

/// The eight patterns ordered L-L-L ... H-H-H by high_mask.
std::array<Pattern, 8> all_patterns();

struct MetapathStrategy {
    Triple anchor;
    Pattern pattern;
};

nlohmann::json to_json(const MetapathStrategy& s, const Vocabulary& vocab);
MetapathStrategy strategy_from_json(const nlohmann::json& j, const Vocabulary& vocab);

bool matches(const KnowledgeGraph& kg, const MetapathStrategy& s, const Triple& t);
/// Every triple of the graph matched by the strategy, in graph order.
std::vector<Triple> match_set(const KnowledgeGraph& kg, const MetapathStrategy& s);
std::size_t match_count(const KnowledgeGraph& kg, const MetapathStrategy& s);

struct BarSegment {
    Pattern pattern;
    std::size_t count = 0;
    double fraction = 0.0;
};

struct LatticeReport {
    Pattern selection;
    std::array<std::size_t, 8> counts{};  // indexed by Pattern::high_mask()

    /// Height count(H-H-H); segments are the 1-Low patterns as fractions of it.
    struct PrimaryBar {
        std::size_t height = 0;
        std::array<BarSegment, 3> segments;
        double display_scale = 1.0;  // < 1 when stacked fractions exceed the bar
    } primary;

    /// Rule None for 0 or 3 Low slots. Children: one Low slot, segments are the
    /// two 2-Low refinements as fractions of the selection. Parents: two Low
    /// slots, segments are the selection as a fraction of each 1-Low parent
    /// (top first).
    struct SecondaryBar {
        enum class Rule { None, Children, Parents };
        Rule rule = Rule::None;
        std::size_t height = 0;
        std::vector<BarSegment> segments;
    } secondary;

    std::size_t count(const Pattern& p) const { return counts[p.high_mask()]; }
};

LatticeReport lattice_report(const KnowledgeGraph& kg, const MetapathStrategy& s);

struct BoxPlot {
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

struct HistogramBin {
    double lower = 0;
    double upper = 0;
    std::size_t count = 0;
};

struct SlotStats {
    Slot slot;
    std::vector<HistogramBin> histogram;                  // 10 log10-spaced bins over [1, max]
    BoxPlot boxplot;                                      // over non-zero counts
    std::vector<std::pair<EntityId, std::size_t>> counts;  // non-zero, by entity id
    std::size_t current = 0;                              // the anchor entity's own count
};

inline constexpr std::size_t kHistogramBins = 10;

SlotStats slot_stats(const KnowledgeGraph& kg, const MetapathStrategy& s, Slot slot);

/// Linear interpolation quantile over sorted values.
double quantile(std::span<const double> sorted, double q);

struct ApplyReport {
    std::vector<std::size_t> matched;  // per strategy, against the graph at apply time
    std::size_t total_deleted = 0;
    std::size_t triples_before = 0;
    double deleted_fraction = 0.0;
    DeletionReport deletion;
};

/// Deletes the union of all matched triples (inverses included) in one mutation.
ApplyReport apply(GraphStore& store, std::span<const MetapathStrategy> strategies);

}  // namespace slw
