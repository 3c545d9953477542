#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "smw/error.hpp"
#include "smw/graph.hpp"
#include "smw/semantic_mutex_watershed.hpp"
#include "smw/tensor.hpp"

namespace smw {

/// Per-pixel (class, instance) pairs. Class -1 is void. Instance ids are
/// meaningful within a class.
struct PanopticLabelMap {
    std::vector<std::size_t> shape;
    std::vector<std::int32_t> class_ids;
    std::vector<std::int32_t> instance_ids;

    PanopticLabelMap() = default;

    explicit PanopticLabelMap(std::vector<std::size_t> s)
        : shape(std::move(s)), class_ids(DenseTensor<std::int32_t>::product(shape), kUnlabeled),
          instance_ids(class_ids.size(), 0) {}

    PanopticLabelMap(std::vector<std::size_t> s, std::vector<std::int32_t> classes, std::vector<std::int32_t> instances)
        : shape(std::move(s)), class_ids(std::move(classes)), instance_ids(std::move(instances)) {
        validate();
    }

    std::size_t size() const noexcept { return class_ids.size(); }

    void validate() const {
        const std::size_t n = DenseTensor<std::int32_t>::product(shape);
        if (class_ids.size() != n || instance_ids.size() != n)
            throw Error(ErrorCode::ShapeMismatch, "label map channels do not match its shape");
    }

    DenseTensor<std::int32_t> class_tensor() const { return {shape, class_ids}; }
    DenseTensor<std::int32_t> instance_tensor() const { return {shape, instance_ids}; }

    static PanopticLabelMap from_tensors(const DenseTensor<std::int32_t>& classes,
                                         const DenseTensor<std::int32_t>& instances) {
        if (classes.shape() != instances.shape())
            throw Error(ErrorCode::ShapeMismatch, "class and instance tensors differ in shape");
        return {classes.shape(), {classes.values().begin(), classes.values().end()},
                {instances.values().begin(), instances.values().end()}};
    }

    friend bool operator==(const PanopticLabelMap&, const PanopticLabelMap&) = default;
};

/// Pixel i gets its node's label as class; clusters are numbered 1, 2, ...
/// within each class (void included) in order of first pixel.
inline PanopticLabelMap label_map_from_segmentation(const SegmentationResult& seg, std::vector<std::size_t> shape) {
    PanopticLabelMap out(std::move(shape));
    if (out.size() != seg.node_cluster.size())
        throw Error(ErrorCode::ShapeMismatch, "segmentation has " + std::to_string(seg.node_cluster.size()) +
                                                  " nodes for " + std::to_string(out.size()) + " pixels");
    std::vector<std::int32_t> instance_of(seg.num_clusters(), 0);
    std::map<LabelId, std::int32_t> next;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto c = seg.node_cluster[i];
        const LabelId l = seg.cluster_labels[c];
        if (instance_of[c] == 0) instance_of[c] = ++next[l];
        out.class_ids[i] = l;
        out.instance_ids[i] = instance_of[c];
    }
    return out;
}

/// Renumbers instances 1, 2, ... per class by first occurrence; void pixels keep instance 0.
inline PanopticLabelMap canonical_instances(const PanopticLabelMap& m) {
    PanopticLabelMap out = m;
    std::map<std::pair<std::int32_t, std::int32_t>, std::int32_t> seen;
    std::map<std::int32_t, std::int32_t> next;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m.class_ids[i] < 0) {
            out.instance_ids[i] = 0;
            continue;
        }
        auto [it, fresh] = seen.try_emplace({m.class_ids[i], m.instance_ids[i]}, 0);
        if (fresh) it->second = ++next[m.class_ids[i]];
        out.instance_ids[i] = it->second;
    }
    return out;
}

struct PqOptions {
    /// All segments of a stuff class count as one segment.
    bool merge_stuff = true;
    /// Classes that appear only in the prediction enter the means (with PQ 0).
    bool include_pred_only_classes = true;
};

struct ClassQuality {
    LabelId class_id = 0;
    bool thing = true;
    double iou_sum = 0.0;
    std::size_t tp = 0, fp = 0, fn = 0;
    double pq = 0.0, sq = 0.0, rq = 0.0;
};

struct PqReport {
    std::vector<ClassQuality> per_class;
    double pq = 0.0, pq_things = 0.0, pq_stuff = 0.0;
    std::size_t num_things = 0, num_stuff = 0;
    /// Pixels predicted void where the ground truth has a class.
    std::size_t pred_void_pixels = 0;
};

/// Panoptic quality. Segments of the same class match when IoU > 0.5, where
/// ground-truth void pixels are left out of the union. An unmatched predicted
/// segment that lies more than half on void is not a false positive.
///
/// With both class sets empty every class is a thing; otherwise classes outside
/// both sets are not evaluated.
inline PqReport panoptic_quality(const PanopticLabelMap& pred, const PanopticLabelMap& gt,
                                 const std::set<LabelId>& things = {}, const std::set<LabelId>& stuff = {},
                                 const PqOptions& options = {}) {
    pred.validate();
    gt.validate();
    if (pred.shape != gt.shape) throw Error(ErrorCode::ShapeMismatch, "prediction and ground truth differ in shape");
    for (LabelId c : things)
        if (stuff.contains(c))
            throw Error(ErrorCode::OverlappingClassSets, "class " + std::to_string(c) + " is both thing and stuff");

    const bool configured = !things.empty() || !stuff.empty();
    auto evaluated = [&](LabelId c) { return c >= 0 && (!configured || things.contains(c) || stuff.contains(c)); };

    struct Segment {
        LabelId cls;
        std::size_t area = 0;
        std::size_t void_overlap = 0;
        bool matched = false;
    };
    auto key_of = [&](std::int32_t cls, std::int32_t inst) -> std::uint64_t {
        if (options.merge_stuff && stuff.contains(cls)) inst = 0;
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cls)) << 32) | static_cast<std::uint32_t>(inst);
    };

    std::vector<Segment> gsegs, psegs;
    std::unordered_map<std::uint64_t, std::size_t> gindex, pindex;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> inter;
    PqReport report;

    constexpr std::size_t none = static_cast<std::size_t>(-1);
    for (std::size_t i = 0; i < gt.size(); ++i) {
        const LabelId gc = gt.class_ids[i], pc = pred.class_ids[i];
        if (pc < 0 && gc >= 0) ++report.pred_void_pixels;
        std::size_t gi = none, pi = none;
        if (evaluated(gc)) {
            auto [it, fresh] = gindex.try_emplace(key_of(gc, gt.instance_ids[i]), gsegs.size());
            if (fresh) gsegs.push_back({gc});
            gi = it->second;
            ++gsegs[gi].area;
        }
        if (evaluated(pc)) {
            auto [it, fresh] = pindex.try_emplace(key_of(pc, pred.instance_ids[i]), psegs.size());
            if (fresh) psegs.push_back({pc});
            pi = it->second;
            ++psegs[pi].area;
            if (gc < 0) ++psegs[pi].void_overlap;
        }
        if (gi != none && pi != none && gc == pc) ++inter[{gi, pi}];
    }

    std::map<LabelId, ClassQuality> classes;
    auto entry = [&](LabelId c) -> ClassQuality& {
        auto [it, fresh] = classes.try_emplace(c);
        if (fresh) {
            it->second.class_id = c;
            it->second.thing = !stuff.contains(c);
        }
        return it->second;
    };
    for (const Segment& s : gsegs) entry(s.cls);

    for (const auto& [pair, count] : inter) {
        Segment& g = gsegs[pair.first];
        Segment& p = psegs[pair.second];
        const double uni = static_cast<double>(p.area + g.area - count - p.void_overlap);
        const double iou = static_cast<double>(count) / uni;
        if (iou > 0.5) {
            g.matched = p.matched = true;
            ClassQuality& q = entry(g.cls);
            ++q.tp;
            q.iou_sum += iou;
        }
    }
    for (const Segment& g : gsegs)
        if (!g.matched) ++entry(g.cls).fn;
    for (const Segment& p : psegs) {
        if (p.matched || 2 * p.void_overlap > p.area) continue;
        if (!classes.contains(p.cls) && !options.include_pred_only_classes) continue;
        ++entry(p.cls).fp;
    }

    double sum = 0.0, sum_th = 0.0, sum_st = 0.0;
    for (auto& [c, q] : classes) {
        const double denom = q.tp + 0.5 * static_cast<double>(q.fp) + 0.5 * static_cast<double>(q.fn);
        q.pq = denom > 0.0 ? q.iou_sum / denom : 0.0;
        q.sq = q.tp > 0 ? q.iou_sum / static_cast<double>(q.tp) : 0.0;
        q.rq = denom > 0.0 ? static_cast<double>(q.tp) / denom : 0.0;
        sum += q.pq;
        if (q.thing) {
            sum_th += q.pq;
            ++report.num_things;
        } else {
            sum_st += q.pq;
            ++report.num_stuff;
        }
        report.per_class.push_back(q);
    }
    if (!classes.empty()) report.pq = sum / static_cast<double>(classes.size());
    if (report.num_things) report.pq_things = sum_th / static_cast<double>(report.num_things);
    if (report.num_stuff) report.pq_stuff = sum_st / static_cast<double>(report.num_stuff);
    return report;
}

namespace detail {

inline std::string shortest(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

} // namespace detail

inline std::string to_key_value(const PqReport& r) {
    std::ostringstream out;
    out << "PQ=" << detail::shortest(r.pq) << '\n'
        << "PQ_Th=" << detail::shortest(r.pq_things) << '\n'
        << "PQ_St=" << detail::shortest(r.pq_stuff) << '\n'
        << "num_things=" << r.num_things << '\n'
        << "num_stuff=" << r.num_stuff << '\n'
        << "pred_void_pixels=" << r.pred_void_pixels << '\n';
    for (const ClassQuality& q : r.per_class) {
        const std::string p = "class." + std::to_string(q.class_id) + '.';
        out << p << "kind=" << (q.thing ? "thing" : "stuff") << '\n'
            << p << "pq=" << detail::shortest(q.pq) << '\n'
            << p << "sq=" << detail::shortest(q.sq) << '\n'
            << p << "rq=" << detail::shortest(q.rq) << '\n'
            << p << "iou_sum=" << detail::shortest(q.iou_sum) << '\n'
            << p << "tp=" << q.tp << '\n'
            << p << "fp=" << q.fp << '\n'
            << p << "fn=" << q.fn << '\n';
    }
    return out.str();
}

inline nlohmann::ordered_json to_json(const PqReport& r) {
    nlohmann::ordered_json j;
    j["PQ"] = r.pq;
    j["PQ_Th"] = r.pq_things;
    j["PQ_St"] = r.pq_stuff;
    j["num_things"] = r.num_things;
    j["num_stuff"] = r.num_stuff;
    j["pred_void_pixels"] = r.pred_void_pixels;
    auto& classes = j["classes"] = nlohmann::ordered_json::array();
    for (const ClassQuality& q : r.per_class) {
        classes.push_back({{"class", q.class_id},
                           {"kind", q.thing ? "thing" : "stuff"},
                           {"pq", q.pq},
                           {"sq", q.sq},
                           {"rq", q.rq},
                           {"iou_sum", q.iou_sum},
                           {"tp", q.tp},
                           {"fp", q.fp},
                           {"fn", q.fn}});
    }
    return j;
}

} // namespace smw
