#ifndef MTTED_FIELD_HPP
#define MTTED_FIELD_HPP

// Scalar fields on regular grids and generic graphs: file I/O, synthetic
// generation, resampling and smoothing, and conversion of a grid into a
// simplicial vertex graph.

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mtted/error.hpp"

namespace mtted {

namespace detail {

inline std::string format_double(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline bool parse_double(std::string_view tok, double& out)
{
    if (!tok.empty() && tok.front() == '+')
        tok.remove_prefix(1);
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return res.ec == std::errc() && res.ptr == tok.data() + tok.size();
}

template <typename Int>
bool parse_int(std::string_view tok, Int& out)
{
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return res.ec == std::errc() && res.ptr == tok.data() + tok.size();
}

/// Whitespace tokenizer that remembers the line each token came from.
class Tokenizer {
public:
    explicit Tokenizer(std::istream& in, std::string source)
        : in_(in), source_(std::move(source))
    {
    }

    bool next(std::string& tok)
    {
        while (pos_ >= line_toks_.size()) {
            std::string line;
            if (!std::getline(in_, line))
                return false;
            ++line_no_;
            line_toks_.clear();
            pos_ = 0;
            std::istringstream ls(line);
            std::string t;
            while (ls >> t)
                line_toks_.push_back(t);
        }
        tok = line_toks_[pos_++];
        return true;
    }

    std::string where() const
    {
        return source_ + ":" + std::to_string(line_no_);
    }

private:
    std::istream& in_;
    std::string source_;
    std::vector<std::string> line_toks_;
    std::size_t pos_ = 0;
    std::size_t line_no_ = 0;
};

} // namespace detail

/// Regular grid of 1 to 3 dimensions, values stored row-major (last axis
/// fastest).
class ScalarGrid {
public:
    ScalarGrid() = default;

    ScalarGrid(std::vector<std::size_t> dims, std::vector<double> values)
        : dims_(std::move(dims)), values_(std::move(values))
    {
        if (dims_.empty() || dims_.size() > 3)
            throw DataError("grid must have 1 to 3 dimensions");
        for (auto d : dims_)
            if (d == 0)
                throw DataError("grid dimensions must be positive");
        if (values_.size() != point_count())
            throw DataError("value count mismatch: dims declare " +
                            std::to_string(point_count()) + " values, got " +
                            std::to_string(values_.size()));
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (!std::isfinite(values_[i]))
                throw DataError("non-finite value at index " + std::to_string(i));
    }

    const std::vector<std::size_t>& dims() const { return dims_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t rank() const { return dims_.size(); }

    std::size_t point_count() const
    {
        return std::accumulate(dims_.begin(), dims_.end(), std::size_t{1},
                               std::multiplies<>());
    }

    std::size_t flat_index(const std::vector<std::size_t>& idx) const
    {
        std::size_t flat = 0;
        for (std::size_t a = 0; a < dims_.size(); ++a)
            flat = flat * dims_[a] + idx[a];
        return flat;
    }

    std::vector<std::size_t> unflatten(std::size_t flat) const
    {
        std::vector<std::size_t> idx(dims_.size());
        for (std::size_t a = dims_.size(); a-- > 0;) {
            idx[a] = flat % dims_[a];
            flat /= dims_[a];
        }
        return idx;
    }

    double at(std::size_t flat) const { return values_[flat]; }

    bool operator==(const ScalarGrid&) const = default;

private:
    std::vector<std::size_t> dims_;
    std::vector<double> values_;
};

/// Scalar function on the vertices of an undirected graph. Vertices are
/// totally ordered by the key (scalar, index), which breaks ties among equal
/// scalar values.
class ScalarGraph {
public:
    using Edge = std::pair<std::size_t, std::size_t>;

    ScalarGraph() = default;

    ScalarGraph(std::vector<double> scalars, std::vector<Edge> edges)
        : scalars_(std::move(scalars)), edges_(std::move(edges))
    {
        const std::size_t n = scalars_.size();
        for (std::size_t i = 0; i < n; ++i)
            if (!std::isfinite(scalars_[i]))
                throw DataError("non-finite scalar at vertex " + std::to_string(i));
        std::set<Edge> seen;
        for (auto& [a, b] : edges_) {
            if (a >= n || b >= n)
                throw DataError("edge (" + std::to_string(a) + "," +
                                std::to_string(b) + ") references a missing vertex");
            if (a == b)
                throw DataError("self-loop at vertex " + std::to_string(a));
            Edge key = std::minmax(a, b);
            if (!seen.insert(key).second)
                throw DataError("duplicate edge (" + std::to_string(key.first) +
                                "," + std::to_string(key.second) + ")");
        }
    }

    std::size_t vertex_count() const { return scalars_.size(); }
    const std::vector<double>& scalars() const { return scalars_; }
    const std::vector<Edge>& edges() const { return edges_; }

    /// True iff vertex a comes strictly before vertex b in the total order.
    bool precedes(std::size_t a, std::size_t b) const
    {
        if (scalars_[a] != scalars_[b])
            return scalars_[a] < scalars_[b];
        return a < b;
    }

    std::vector<std::vector<std::size_t>> adjacency() const
    {
        std::vector<std::vector<std::size_t>> adj(scalars_.size());
        for (auto [a, b] : edges_) {
            adj[a].push_back(b);
            adj[b].push_back(a);
        }
        return adj;
    }

    bool operator==(const ScalarGraph&) const = default;

private:
    std::vector<double> scalars_;
    std::vector<Edge> edges_;
};

struct GaussianSpec {
    std::vector<double> center;
    double amplitude = 1.0;
    double sigma = 1.0;
};

enum class GridFormat { text, binary };

// ---------------------------------------------------------------------------
// I/O

inline ScalarGrid read_grid_text(std::istream& in, const std::string& source = "<grid>")
{
    detail::Tokenizer tok(in, source);
    std::string t;
    if (!tok.next(t) || t != "dims")
        throw DataError(tok.where() + ": malformed header, expected 'dims'");
    std::vector<std::size_t> dims;
    std::vector<double> values;
    // The dims line is consumed token by token; the first token on a later
    // line starts the values.
    std::string header_where = tok.where();
    while (tok.next(t)) {
        if (tok.where() != header_where) {
            double v;
            if (!detail::parse_double(t, v))
                throw DataError(tok.where() + ": bad value '" + t + "'");
            values.push_back(v);
            break;
        }
        std::size_t d;
        if (!detail::parse_int(t, d) || d == 0)
            throw DataError(tok.where() + ": malformed header, bad dimension '" + t + "'");
        dims.push_back(d);
    }
    if (dims.empty() || dims.size() > 3)
        throw DataError(header_where + ": malformed header, need 1 to 3 dimensions");
    while (tok.next(t)) {
        double v;
        if (!detail::parse_double(t, v))
            throw DataError(tok.where() + ": bad value '" + t + "'");
        if (!std::isfinite(v))
            throw DataError(tok.where() + ": non-finite value at index " +
                            std::to_string(values.size()));
        values.push_back(v);
    }
    if (!values.empty() && !std::isfinite(values.front()))
        throw DataError(source + ": non-finite value at index 0");
    std::size_t expected = std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                                           std::multiplies<>());
    if (values.size() != expected)
        throw DataError(source + ": value count mismatch: expected " +
                        std::to_string(expected) + ", got " +
                        std::to_string(values.size()));
    return ScalarGrid(std::move(dims), std::move(values));
}

inline void write_grid_text(std::ostream& out, const ScalarGrid& g)
{
    out << "dims";
    for (auto d : g.dims())
        out << ' ' << d;
    out << '\n';
    const std::size_t row = g.dims().back();
    for (std::size_t i = 0; i < g.values().size(); ++i) {
        out << detail::format_double(g.values()[i]);
        out << ((i + 1) % row == 0 ? '\n' : ' ');
    }
}

namespace detail {

inline void put_u64(std::ostream& out, std::uint64_t v)
{
    unsigned char b[8];
    for (int i = 0; i < 8; ++i)
        b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

inline bool get_u64(std::istream& in, std::uint64_t& v)
{
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8))
        return false;
    v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return true;
}

} // namespace detail

inline ScalarGrid read_grid_binary(std::istream& in, const std::string& source = "<grid>")
{
    std::uint64_t rank;
    if (!detail::get_u64(in, rank) || rank == 0 || rank > 3)
        throw DataError(source + ": malformed header, bad dimension count");
    std::vector<std::size_t> dims;
    for (std::uint64_t a = 0; a < rank; ++a) {
        std::uint64_t d;
        if (!detail::get_u64(in, d) || d == 0)
            throw DataError(source + ": malformed header, bad dimension " + std::to_string(a));
        dims.push_back(static_cast<std::size_t>(d));
    }
    std::size_t expected = std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                                           std::multiplies<>());
    std::vector<double> values;
    values.reserve(expected);
    std::uint64_t bits;
    while (detail::get_u64(in, bits)) {
        double v = std::bit_cast<double>(bits);
        if (!std::isfinite(v))
            throw DataError(source + ": non-finite value at index " +
                            std::to_string(values.size()));
        values.push_back(v);
    }
    if (in.gcount() != 0 && in.gcount() != 8)
        throw DataError(source + ": truncated value at index " + std::to_string(values.size()));
    if (values.size() != expected)
        throw DataError(source + ": value count mismatch: expected " +
                        std::to_string(expected) + ", got " +
                        std::to_string(values.size()));
    return ScalarGrid(std::move(dims), std::move(values));
}

inline void write_grid_binary(std::ostream& out, const ScalarGrid& g)
{
    detail::put_u64(out, g.dims().size());
    for (auto d : g.dims())
        detail::put_u64(out, d);
    for (double v : g.values())
        detail::put_u64(out, std::bit_cast<std::uint64_t>(v));
}

inline ScalarGrid load_grid(const std::string& path, GridFormat format)
{
    std::ifstream in(path, format == GridFormat::binary ? std::ios::binary : std::ios::in);
    if (!in)
        throw DataError("cannot open " + path);
    return format == GridFormat::binary ? read_grid_binary(in, path)
                                        : read_grid_text(in, path);
}

inline void save_grid(const std::string& path, const ScalarGrid& g, GridFormat format)
{
    std::ofstream out(path, format == GridFormat::binary ? std::ios::binary : std::ios::out);
    if (!out)
        throw DataError("cannot write " + path);
    if (format == GridFormat::binary)
        write_grid_binary(out, g);
    else
        write_grid_text(out, g);
}

inline ScalarGraph read_graph_text(std::istream& in, const std::string& source = "<graph>")
{
    detail::Tokenizer tok(in, source);
    std::string t;
    std::size_t n = 0;
    if (!tok.next(t) || t != "vertices" || !tok.next(t) || !detail::parse_int(t, n))
        throw DataError(tok.where() + ": malformed header, expected 'vertices <n>'");
    std::vector<double> scalars(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!tok.next(t) || !detail::parse_double(t, scalars[i]))
            throw DataError(tok.where() + ": bad scalar for vertex " + std::to_string(i));
        if (!std::isfinite(scalars[i]))
            throw DataError(tok.where() + ": non-finite scalar at vertex " + std::to_string(i));
    }
    std::size_t m = 0;
    if (!tok.next(t) || t != "edges" || !tok.next(t) || !detail::parse_int(t, m))
        throw DataError(tok.where() + ": malformed header, expected 'edges <m>'");
    std::vector<ScalarGraph::Edge> edges(m);
    for (std::size_t e = 0; e < m; ++e) {
        std::string a, b;
        if (!tok.next(a) || !tok.next(b) || !detail::parse_int(a, edges[e].first) ||
            !detail::parse_int(b, edges[e].second))
            throw DataError(tok.where() + ": bad edge record " + std::to_string(e));
    }
    if (tok.next(t))
        throw DataError(tok.where() + ": trailing data '" + t + "'");
    try {
        return ScalarGraph(std::move(scalars), std::move(edges));
    } catch (const DataError& e) {
        throw DataError(source + ": " + e.what());
    }
}

inline void write_graph_text(std::ostream& out, const ScalarGraph& g)
{
    out << "vertices " << g.vertex_count() << '\n';
    for (double v : g.scalars())
        out << detail::format_double(v) << '\n';
    out << "edges " << g.edges().size() << '\n';
    for (auto [a, b] : g.edges())
        out << a << ' ' << b << '\n';
}

inline ScalarGraph load_graph(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open " + path);
    return read_graph_text(in, path);
}

// ---------------------------------------------------------------------------
// Generation and preprocessing

/// Sum of isotropic gaussians sampled at integer grid coordinates.
inline ScalarGrid gen_gaussian_sum(const std::vector<std::size_t>& dims,
                                   const std::vector<GaussianSpec>& specs)
{
    if (dims.empty())
        throw DataError("gaussian sum needs at least one dimension");
    for (const auto& s : specs) {
        if (s.center.size() != dims.size())
            throw DataError("gaussian center has wrong dimension count");
        if (!(s.sigma > 0))
            throw DataError("gaussian sigma must be positive");
        for (std::size_t a = 0; a < dims.size(); ++a)
            if (s.center[a] < 0 || s.center[a] > static_cast<double>(dims[a] - 1))
                throw DataError("gaussian center lies outside the grid");
    }
    std::size_t n = std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                                    std::multiplies<>());
    std::vector<double> values(n, 0.0);
    std::vector<std::size_t> idx(dims.size(), 0);
    for (std::size_t flat = 0; flat < n; ++flat) {
        double v = 0;
        for (const auto& s : specs) {
            double r2 = 0;
            for (std::size_t a = 0; a < dims.size(); ++a) {
                double dx = static_cast<double>(idx[a]) - s.center[a];
                r2 += dx * dx;
            }
            v += s.amplitude * std::exp(-r2 / (2 * s.sigma * s.sigma));
        }
        values[flat] = v;
        for (std::size_t a = dims.size(); a-- > 0;) {
            if (++idx[a] < dims[a])
                break;
            idx[a] = 0;
        }
    }
    return ScalarGrid(dims, std::move(values));
}

namespace detail {

/// Builds a grid by picking source indices per axis.
inline ScalarGrid select_indices(const ScalarGrid& g,
                                 const std::vector<std::vector<std::size_t>>& picks)
{
    std::vector<std::size_t> dims;
    for (auto& p : picks)
        dims.push_back(p.size());
    std::size_t n = std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                                    std::multiplies<>());
    std::vector<double> values(n);
    std::vector<std::size_t> idx(dims.size(), 0), src(dims.size());
    for (std::size_t flat = 0; flat < n; ++flat) {
        for (std::size_t a = 0; a < dims.size(); ++a)
            src[a] = picks[a][idx[a]];
        values[flat] = g.at(g.flat_index(src));
        for (std::size_t a = dims.size(); a-- > 0;) {
            if (++idx[a] < dims[a])
                break;
            idx[a] = 0;
        }
    }
    return ScalarGrid(std::move(dims), std::move(values));
}

} // namespace detail

/// Keeps every step-th sample along each axis, starting at index 0.
inline ScalarGrid subsample(const ScalarGrid& g, std::size_t step)
{
    if (step == 0)
        throw DataError("subsample step must be at least 1");
    std::vector<std::vector<std::size_t>> picks;
    for (auto d : g.dims()) {
        if (step > d)
            throw DataError("subsample step " + std::to_string(step) +
                            " larger than dimension " + std::to_string(d));
        std::vector<std::size_t> p;
        for (std::size_t i = 0; i < d; i += step)
            p.push_back(i);
        picks.push_back(std::move(p));
    }
    return detail::select_indices(g, picks);
}

/// Nearest-index resampling to new_dims (each no larger than the source).
/// Sample i of an axis of length m is taken from round(i * (n-1) / (m-1)).
inline ScalarGrid resample_nearest(const ScalarGrid& g, const std::vector<std::size_t>& new_dims)
{
    if (new_dims.size() != g.rank())
        throw DataError("resample: dimension count mismatch");
    std::vector<std::vector<std::size_t>> picks;
    for (std::size_t a = 0; a < g.rank(); ++a) {
        const std::size_t n = g.dims()[a], m = new_dims[a];
        if (m == 0 || m > n)
            throw DataError("resample: target dimension must be in [1, " +
                            std::to_string(n) + "]");
        std::vector<std::size_t> p(m, 0);
        for (std::size_t i = 0; i < m && m > 1; ++i)
            p[i] = static_cast<std::size_t>(
                std::llround(static_cast<double>(i) * static_cast<double>(n - 1) /
                             static_cast<double>(m - 1)));
        picks.push_back(std::move(p));
    }
    return detail::select_indices(g, picks);
}

/// Successive reductions: each iteration removes reduce_by samples per axis
/// from the previous grid. Returns iterations + 1 grids, the input first.
inline std::vector<ScalarGrid> subsample_schedule(const ScalarGrid& g, std::size_t reduce_by,
                                                  std::size_t iterations)
{
    std::vector<ScalarGrid> out{g};
    for (std::size_t it = 0; it < iterations; ++it) {
        std::vector<std::size_t> dims = out.back().dims();
        for (auto& d : dims) {
            if (d <= reduce_by)
                throw DataError("subsample schedule reduces a dimension to zero");
            d -= reduce_by;
        }
        out.push_back(resample_nearest(out.back(), dims));
    }
    return out;
}

/// Each iteration replaces a value by the mean of itself and its existing
/// axis-aligned neighbours.
inline ScalarGrid smooth_laplacian(const ScalarGrid& g, std::size_t iterations)
{
    const auto& dims = g.dims();
    std::vector<std::size_t> stride(dims.size(), 1);
    for (std::size_t a = dims.size() - 1; a-- > 0;)
        stride[a] = stride[a + 1] * dims[a + 1];
    std::vector<double> cur = g.values(), next(cur.size());
    for (std::size_t it = 0; it < iterations; ++it) {
        std::vector<std::size_t> idx(dims.size(), 0);
        for (std::size_t flat = 0; flat < cur.size(); ++flat) {
            double sum = cur[flat];
            int count = 1;
            for (std::size_t a = 0; a < dims.size(); ++a) {
                if (idx[a] > 0) {
                    sum += cur[flat - stride[a]];
                    ++count;
                }
                if (idx[a] + 1 < dims[a]) {
                    sum += cur[flat + stride[a]];
                    ++count;
                }
            }
            next[flat] = sum / count;
            for (std::size_t a = dims.size(); a-- > 0;) {
                if (++idx[a] < dims[a])
                    break;
                idx[a] = 0;
            }
        }
        cur.swap(next);
    }
    return ScalarGrid(dims, std::move(cur));
}

/// Vertex graph of the Freudenthal (Kuhn) triangulation of the grid: every
/// vertex links to the neighbours at offsets in {0,1}^d \ {0}. This gives a
/// path in 1D, 6-neighbourhoods in 2D and 14-neighbourhoods in 3D.
inline ScalarGraph grid_to_graph(const ScalarGrid& g)
{
    const auto& dims = g.dims();
    const std::size_t rank = dims.size();
    std::vector<std::vector<int>> offsets;
    for (unsigned mask = 1; mask < (1u << rank); ++mask) {
        std::vector<int> o(rank);
        for (std::size_t a = 0; a < rank; ++a)
            o[a] = (mask >> (rank - 1 - a)) & 1u;
        offsets.push_back(std::move(o));
    }
    std::vector<ScalarGraph::Edge> edges;
    std::vector<std::size_t> idx(rank, 0), nb(rank);
    for (std::size_t flat = 0; flat < g.point_count(); ++flat) {
        for (const auto& o : offsets) {
            bool inside = true;
            for (std::size_t a = 0; a < rank; ++a) {
                nb[a] = idx[a] + static_cast<std::size_t>(o[a]);
                if (nb[a] >= dims[a]) {
                    inside = false;
                    break;
                }
            }
            if (inside)
                edges.emplace_back(flat, g.flat_index(nb));
        }
        for (std::size_t a = rank; a-- > 0;) {
            if (++idx[a] < dims[a])
                break;
            idx[a] = 0;
        }
    }
    return ScalarGraph(g.values(), std::move(edges));
}

} // namespace mtted

#endif
