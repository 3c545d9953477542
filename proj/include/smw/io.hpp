#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "smw/error.hpp"
#include "smw/graph.hpp"
#include "smw/grid.hpp"
#include "smw/semantic_mutex_watershed.hpp"

namespace smw {

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

template <class T>
T parse_number(std::string_view s, std::size_t line, const char* what) {
    T value{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError(line, "bad " + std::string(what) + " '" + std::string(s) + "'");
    return value;
}

inline std::string format_double(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

} // namespace detail

/// SMWG v1: header `SMWG v1 <num_nodes> <num_labels>`, then one edge per line
/// (`A u v w`, `R u v w`, `S u l w`). `#` starts a comment; blank lines are ignored.
inline ExtendedGraph read_graph(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    std::size_t n = 0, k = 0;
    std::vector<EdgeSpec> edges;
    while (std::getline(in, line)) {
        ++lineno;
        const auto f = detail::split_fields(line);
        if (f.empty()) continue;
        if (!have_header) {
            if (f.size() != 4 || f[0] != "SMWG" || f[1] != "v1")
                throw ParseError(lineno, "expected header 'SMWG v1 <num_nodes> <num_labels>'");
            n = detail::parse_number<std::uint32_t>(f[2], lineno, "node count");
            k = detail::parse_number<std::uint32_t>(f[3], lineno, "label count");
            have_header = true;
            continue;
        }
        if (f.size() != 4 || f[0].size() != 1) throw ParseError(lineno, "expected '<A|R|S> a b w'");
        EdgeSpec s;
        switch (f[0][0]) {
        case 'A': s.type = EdgeType::Attractive; break;
        case 'R': s.type = EdgeType::Repulsive; break;
        case 'S': s.type = EdgeType::Semantic; break;
        default: throw ParseError(lineno, "unknown edge type '" + std::string(f[0]) + "'");
        }
        s.u = detail::parse_number<std::uint32_t>(f[1], lineno, "node id");
        s.second = detail::parse_number<std::uint32_t>(f[2], lineno, s.type == EdgeType::Semantic ? "label" : "node id");
        s.weight = detail::parse_number<double>(f[3], lineno, "weight");
        try {
            build_graph(n, k, std::span<const EdgeSpec>(&s, 1));
        } catch (const Error& e) {
            throw ParseError(lineno, e.what());
        }
        edges.push_back(s);
    }
    if (!have_header) throw ParseError(lineno, "missing SMWG header");
    return build_graph(n, k, edges);
}

inline ExtendedGraph read_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    return read_graph(in);
}

/// Weights are written in shortest round-trip form.
inline void write_graph(std::ostream& out, const ExtendedGraph& g) {
    out << "SMWG v1 " << g.num_nodes() << ' ' << g.num_labels() << '\n';
    for (const Edge& e : g.edges())
        out << type_tag(e.type) << ' ' << e.u << ' ' << e.second << ' ' << detail::format_double(e.weight) << '\n';
}

inline void write_graph_file(const std::string& path, const ExtendedGraph& g) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    write_graph(out, g);
}

/// Offsets file: one `A d0 d1 ...` or `R d0 d1 ...` line per offset, in
/// affinity channel order.
inline OffsetPattern read_offsets(std::istream& in) {
    OffsetPattern pattern;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto f = detail::split_fields(line);
        if (f.empty()) continue;
        if (f.size() < 2 || (f[0] != "A" && f[0] != "R")) throw ParseError(lineno, "expected '<A|R> d0 d1 ...'");
        std::vector<std::int64_t> delta;
        for (std::size_t i = 1; i < f.size(); ++i) delta.push_back(detail::parse_number<std::int64_t>(f[i], lineno, "offset"));
        try {
            pattern.add(std::move(delta), f[0] == "A" ? Polarity::Attractive : Polarity::Repulsive);
        } catch (const Error& e) {
            throw ParseError(lineno, e.what());
        }
    }
    return pattern;
}

inline OffsetPattern read_offsets_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    return read_offsets(in);
}

inline void write_offsets(std::ostream& out, const OffsetPattern& pattern) {
    for (const Offset& o : pattern) {
        out << (o.polarity == Polarity::Attractive ? 'A' : 'R');
        for (auto d : o.delta) out << ' ' << d;
        out << '\n';
    }
}

/// One `node cluster label` line per node; unlabeled clusters print -1.
inline void write_node_assignment(std::ostream& out, const SegmentationResult& r) {
    for (std::size_t i = 0; i < r.node_cluster.size(); ++i)
        out << i << ' ' << r.node_cluster[i] << ' ' << r.node_label(static_cast<NodeId>(i)) << '\n';
}

} // namespace smw
