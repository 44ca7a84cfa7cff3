#include "slw/metapath.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace slw {

Pattern Pattern::parse(std::string_view text) {
    if (text.size() != 5 || text[1] != '-' || text[3] != '-') {
        throw std::invalid_argument("malformed pattern '" + std::string(text) + "'");
    }
    Pattern p;
    for (std::size_t i = 0; i < 3; ++i) {
        const char c = text[i * 2];
        if (c == 'L') {
            p.levels[i] = Granularity::Low;
        } else if (c == 'H') {
            p.levels[i] = Granularity::High;
        } else {
            throw std::invalid_argument("malformed pattern '" + std::string(text) + "'");
        }
    }
    return p;
}

Pattern Pattern::from_bits(unsigned high_mask) {
    Pattern p;
    for (std::size_t i = 0; i < 3; ++i) {
        p.levels[i] = (high_mask >> i) & 1U ? Granularity::High : Granularity::Low;
    }
    return p;
}

unsigned Pattern::high_mask() const {
    unsigned m = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        if (levels[i] == Granularity::High) m |= 1U << i;
    }
    return m;
}

std::string Pattern::str() const {
    std::string s;
    for (std::size_t i = 0; i < 3; ++i) {
        if (i) s += '-';
        s += levels[i] == Granularity::Low ? 'L' : 'H';
    }
    return s;
}

int Pattern::low_count() const {
    return static_cast<int>(std::count(levels.begin(), levels.end(), Granularity::Low));
}

Pattern Pattern::with(Slot s, Granularity g) const {
    Pattern p = *this;
    p.levels[static_cast<std::size_t>(s)] = g;
    return p;
}

std::array<Pattern, 8> all_patterns() {
    std::array<Pattern, 8> out;
    for (unsigned m = 0; m < 8; ++m) out[m] = Pattern::from_bits(m);
    return out;
}

nlohmann::json to_json(const MetapathStrategy& s, const Vocabulary& vocab) {
    return {
        {"anchor",
         {{"head", vocab.entity(s.anchor.head).id},
          {"relation", vocab.relation(s.anchor.relation).id},
          {"tail", vocab.entity(s.anchor.tail).id}}},
        {"pattern", s.pattern.str()},
    };
}

MetapathStrategy strategy_from_json(const nlohmann::json& j, const Vocabulary& vocab) {
    const auto& a = j.at("anchor");
    return MetapathStrategy{
        Triple{vocab.entity_id(a.at("head").get<std::string>()),
               vocab.relation_id(a.at("relation").get<std::string>()),
               vocab.entity_id(a.at("tail").get<std::string>())},
        Pattern::parse(j.at("pattern").get<std::string>()),
    };
}

namespace {

// Bit i set when slot i of the triple agrees with the anchor at Low level;
// bit i + 3 set when it agrees at High level.
unsigned slot_agreement(const KnowledgeGraph& kg, const Triple& anchor, const Triple& t) {
    unsigned bits = 0;
    if (t.head == anchor.head) bits |= 1U;
    if (t.relation == anchor.relation) bits |= 2U;
    if (t.tail == anchor.tail) bits |= 4U;
    if (kg.type_of(t.head) == kg.type_of(anchor.head)) bits |= 8U;
    bits |= 16U;  // All_edge
    if (kg.type_of(t.tail) == kg.type_of(anchor.tail)) bits |= 32U;
    return bits;
}

bool agrees(unsigned bits, const Pattern& p) {
    for (std::size_t i = 0; i < 3; ++i) {
        const unsigned needed = p.levels[i] == Granularity::Low ? (1U << i) : (8U << i);
        if (!(bits & needed)) return false;
    }
    return true;
}

template <typename Fn>
void for_each_candidate(const KnowledgeGraph& kg, const MetapathStrategy& s, Fn&& fn) {
    if (s.pattern[Slot::Source] == Granularity::Low) {
        for (auto ti : kg.out_edges(s.anchor.head)) fn(ti);
    } else if (s.pattern[Slot::Target] == Granularity::Low) {
        for (auto ti : kg.in_edges(s.anchor.tail)) fn(ti);
    } else {
        for (std::uint32_t ti = 0; ti < kg.num_triples(); ++ti) fn(ti);
    }
}

}  // namespace

bool matches(const KnowledgeGraph& kg, const MetapathStrategy& s, const Triple& t) {
    return agrees(slot_agreement(kg, s.anchor, t), s.pattern);
}

std::vector<Triple> match_set(const KnowledgeGraph& kg, const MetapathStrategy& s) {
    std::vector<std::uint32_t> hits;
    for_each_candidate(kg, s, [&](std::uint32_t ti) {
        if (matches(kg, s, kg.triple(ti))) hits.push_back(ti);
    });
    std::sort(hits.begin(), hits.end());
    std::vector<Triple> out;
    out.reserve(hits.size());
    for (auto ti : hits) out.push_back(kg.triple(ti));
    return out;
}

std::size_t match_count(const KnowledgeGraph& kg, const MetapathStrategy& s) {
    std::size_t n = 0;
    for_each_candidate(kg, s, [&](std::uint32_t ti) {
        if (matches(kg, s, kg.triple(ti))) ++n;
    });
    return n;
}

LatticeReport lattice_report(const KnowledgeGraph& kg, const MetapathStrategy& s) {
    LatticeReport report;
    report.selection = s.pattern;
    const auto patterns = all_patterns();
    // One scan settles all eight counts.
    for (const auto& t : kg.triples()) {
        const unsigned bits = slot_agreement(kg, s.anchor, t);
        for (unsigned m = 0; m < 8; ++m) {
            if (agrees(bits, patterns[m])) ++report.counts[m];
        }
    }

    auto fraction = [](std::size_t num, std::size_t den) {
        return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };

    const Pattern hhh = Pattern::from_bits(7);
    report.primary.height = report.count(hhh);
    double stacked = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const Pattern one_low = hhh.with(static_cast<Slot>(i), Granularity::Low);
        auto& seg = report.primary.segments[i];
        seg.pattern = one_low;
        seg.count = report.count(one_low);
        seg.fraction = fraction(seg.count, report.primary.height);
        stacked += seg.fraction;
    }
    report.primary.display_scale = stacked > 1.0 ? 1.0 / stacked : 1.0;

    auto& sec = report.secondary;
    const Pattern& sel = s.pattern;
    if (sel.low_count() == 1) {
        sec.rule = LatticeReport::SecondaryBar::Rule::Children;
        sec.height = report.count(sel);
        for (std::size_t i = 0; i < 3; ++i) {
            if (sel.levels[i] == Granularity::Low) continue;
            const Pattern child = sel.with(static_cast<Slot>(i), Granularity::Low);
            const auto c = report.count(child);
            sec.segments.push_back({child, c, fraction(c, sec.height)});
        }
    } else if (sel.low_count() == 2) {
        sec.rule = LatticeReport::SecondaryBar::Rule::Parents;
        sec.height = report.count(sel);
        for (std::size_t i = 0; i < 3; ++i) {
            if (sel.levels[i] == Granularity::High) continue;
            const Pattern parent = sel.with(static_cast<Slot>(i), Granularity::High);
            sec.segments.push_back({parent, report.count(parent), fraction(sec.height, report.count(parent))});
        }
    }
    return report;
}

double quantile(std::span<const double> sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

SlotStats slot_stats(const KnowledgeGraph& kg, const MetapathStrategy& s, Slot slot) {
    if (slot == Slot::Relation) throw std::invalid_argument("slot statistics need an endpoint slot");
    SlotStats stats;
    stats.slot = slot;

    const EntityType head_type = kg.type_of(s.anchor.head);
    const EntityType tail_type = kg.type_of(s.anchor.tail);
    const EntityId anchor_entity = slot == Slot::Source ? s.anchor.head : s.anchor.tail;

    std::vector<std::size_t> per_entity(kg.vocab().num_entities(), 0);
    for (const auto& t : kg.triples()) {
        if (kg.type_of(t.head) != head_type || kg.type_of(t.tail) != tail_type) continue;
        ++per_entity[slot == Slot::Source ? t.head : t.tail];
    }
    std::vector<double> values;
    std::size_t max_count = 0;
    for (EntityId e = 0; e < per_entity.size(); ++e) {
        if (per_entity[e] == 0) continue;
        stats.counts.emplace_back(e, per_entity[e]);
        values.push_back(static_cast<double>(per_entity[e]));
        max_count = std::max(max_count, per_entity[e]);
    }
    stats.current = per_entity[anchor_entity];

    std::sort(values.begin(), values.end());
    if (!values.empty()) {
        stats.boxplot = {values.front(), quantile(values, 0.25), quantile(values, 0.5), quantile(values, 0.75),
                         values.back()};
    }

    const double span = max_count > 0 ? std::log10(static_cast<double>(max_count)) : 0.0;
    stats.histogram.resize(kHistogramBins);
    for (std::size_t b = 0; b < kHistogramBins; ++b) {
        stats.histogram[b].lower = std::pow(10.0, span * static_cast<double>(b) / kHistogramBins);
        stats.histogram[b].upper = std::pow(10.0, span * static_cast<double>(b + 1) / kHistogramBins);
    }
    for (double v : values) {
        std::size_t b = 0;
        if (span > 0.0) {
            b = static_cast<std::size_t>(std::floor(std::log10(v) / span * kHistogramBins));
            b = std::min(b, kHistogramBins - 1);
        }
        ++stats.histogram[b].count;
    }
    return stats;
}

ApplyReport apply(GraphStore& store, std::span<const MetapathStrategy> strategies) {
    ApplyReport report;
    auto graph = store.current();
    report.triples_before = graph->num_triples();
    std::vector<Triple> doomed;
    std::unordered_set<Triple, TripleHash> seen;
    for (const auto& s : strategies) {
        auto hits = match_set(*graph, s);
        report.matched.push_back(hits.size());
        for (const auto& t : hits) {
            if (seen.insert(t).second) doomed.push_back(t);
        }
    }
    if (!doomed.empty()) report.deletion = store.delete_triples(doomed);
    report.deletion.triples_before = report.triples_before;
    report.total_deleted = report.deletion.deleted;
    report.deleted_fraction = report.triples_before == 0
                                  ? 0.0
                                  : static_cast<double>(report.total_deleted) /
                                        static_cast<double>(report.triples_before);
    if (doomed.empty()) report.deletion.version = graph->version();
    return report;
}

}  // namespace slw
