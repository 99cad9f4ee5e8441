#pragma once

// Inside/outside labeling of the cell complex: face coverage, the winding
// field of the oriented face set, the min-cut of the direction energy, the
// iterative boundary scheme, and mesh extraction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "polyrecon/alpha_shape.hpp"
#include "polyrecon/error.hpp"
#include "polyrecon/kdtree.hpp"
#include "polyrecon/max_flow.hpp"
#include "polyrecon/partition.hpp"
#include "polyrecon/point_cloud.hpp"
#include "polyrecon/poly_mesh.hpp"
#include "polyrecon/winding.hpp"

namespace polyrecon {

inline constexpr int kExterior = -1;

enum class Label : std::int8_t { Undecided, In, Out };

inline const char* to_string(Label l) {
  switch (l) {
    case Label::In: return "in";
    case Label::Out: return "out";
    default: return "undecided";
  }
}

/// A face of the complex seen from cell_a; the polygon normal points from
/// cell_a towards cell_b (kExterior for faces on the convex space boundary).
struct FaceRecord {
  ConvexPolygon polygon;
  int cell_a = -1;
  int cell_b = kExterior;
  int source = kNoSource;
  double coverage = 0.0;
  bool candidate = false;
};

struct OrientParams {
  double t_r = 0.5;
  double lambda_v = 1.0;
  int max_iter = 10;
  double eps_assoc = 0.0;  // point-to-face association distance
  double alpha = 0.0;      // alpha of the coverage alpha-shapes
};

/// Area fraction of `poly` covered by the alpha-shape of the cloud points
/// within `eps_assoc` of its plane that project inside it.
inline double compute_coverage(const ConvexPolygon& poly, const PointCloud& cloud, const KdTree& tree, double eps_assoc,
                               double alpha) {
  const double area = poly.area();
  if (!(area > 0.0)) return 0.0;
  const Vec3 c = poly.centroid();
  double reach = 0.0;
  for (const auto& v : poly.vertices) reach = std::max(reach, distance(v, c));
  reach += eps_assoc;
  const PlaneFrame frame(poly.plane, c);
  std::vector<Vec2> ring;
  for (const auto& v : poly.vertices) ring.push_back(frame.to_2d(v));
  std::vector<Vec2> flat;
  for (auto i : tree.radius(c, reach * reach)) {
    const Vec3& p = cloud.points[i];
    if (std::abs(poly.plane.signed_distance(p)) > eps_assoc) continue;
    const Vec2 q = frame.to_2d(p);
    if (inside_convex_2d(ring, q)) flat.push_back(q);
  }
  if (flat.size() < 3) return 0.0;
  try {
    return std::clamp(alpha_shape_2d(flat, alpha).area / area, 0.0, 1.0);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::DegenerateInput) return 0.0;
    throw;
  }
}

/// One record per adjacency polygon and per hull face, with coverage.
inline std::vector<FaceRecord> build_face_records(const CellComplex& cx, const PointCloud& cloud,
                                                  const OrientParams& params) {
  std::vector<FaceRecord> out;
  for (const auto& a : cx.adjacency) out.push_back({a.polygon, a.cell_a, a.cell_b, a.source, 0.0, false});
  for (const auto& h : cx.hull_faces) out.push_back({cx.cells[h.cell].faces[h.face], h.cell, kExterior, h.source, 0.0, false});
  const KdTree tree(cloud.points);
  for (auto& f : out) {
    f.coverage = compute_coverage(f.polygon, cloud, tree, params.eps_assoc, params.alpha);
    f.candidate = f.coverage > params.t_r;
  }
  return out;
}

/// Min-cut problem over the undecided cells: node i stands for cell cells[i].
struct CutGraph {
  std::vector<int> cells;
  std::vector<double> w;  // clamped winding value
  std::vector<double> cost_in, cost_out;
  struct Pair {
    int i, j;
    double cost;
  };
  std::vector<Pair> pairs;

  std::size_t size() const { return cells.size(); }
};

/// E_dir of a labeling (1 = in) of the graph's nodes.
inline double cut_energy(const CutGraph& g, std::span<const char> in) {
  double e = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) e += in[i] ? g.cost_in[i] : g.cost_out[i];
  for (const auto& p : g.pairs)
    if (in[p.i] != in[p.j]) e += p.cost;
  return e;
}

/// Exact minimiser by min-cut; the source side is IN. Of all optimal
/// labelings the one with the fewest IN nodes is returned.
inline std::vector<char> solve_labels(const CutGraph& g) {
  const int n = static_cast<int>(g.size());
  MaxFlow mf(n + 2);
  const int s = n, t = n + 1;
  for (int i = 0; i < n; ++i) {
    if (g.cost_out[i] > 0.0) mf.add_edge(s, i, g.cost_out[i]);
    if (g.cost_in[i] > 0.0) mf.add_edge(i, t, g.cost_in[i]);
  }
  for (const auto& p : g.pairs)
    if (p.cost > 0.0) mf.add_edge(p.i, p.j, p.cost, p.cost);
  mf.solve(s, t);
  const auto side = mf.source_side(s);
  return std::vector<char>(side.begin(), side.begin() + n);
}

struct IterationRecord {
  int iteration = 0;
  std::vector<int> oriented_faces;  // signed: +(f+1) as stored, -(f+1) reversed
  CutGraph graph;
  std::vector<char> tentative;  // solver output per graph node
  std::vector<Label> labels;    // committed labels after the iteration
};

struct LabelState {
  std::vector<Label> labels;
  std::vector<int> oriented_faces;  // S, same signed encoding as IterationRecord
  int iterations = 0;
  std::vector<IterationRecord> history;
};

inline OrientedFace oriented_face(const FaceRecord& f, int signed_id) {
  OrientedFace o = to_oriented_face(f.polygon);
  if (signed_id < 0) o.normal = -o.normal;
  return o;
}

/// S: all hull faces, every cell undecided.
inline LabelState initialize_orientation(const CellComplex& cx, std::span<const FaceRecord> faces) {
  LabelState st;
  st.labels.assign(cx.cells.size(), Label::Undecided);
  for (std::size_t f = 0; f < faces.size(); ++f)
    if (faces[f].cell_b == kExterior) st.oriented_faces.push_back(static_cast<int>(f) + 1);
  return st;
}

namespace detail {

inline Label side_label(const std::vector<Label>& labels, int cell) {
  return cell == kExterior ? Label::Out : labels[cell];
}

}  // namespace detail

/// The oriented face set for the current labels: hull faces of cells not
/// labeled out, every in|out face, and candidate faces between a labeled and
/// an undecided cell, each with its normal pointing from the inside guess to
/// the outside guess.
inline std::vector<int> oriented_face_set(const std::vector<Label>& labels, std::span<const FaceRecord> faces) {
  std::vector<int> s;
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const int id = static_cast<int>(f) + 1;
    const auto& r = faces[f];
    const Label a = labels[r.cell_a];
    if (r.cell_b == kExterior) {
      if (a != Label::Out) s.push_back(id);
      continue;
    }
    const Label b = labels[r.cell_b];
    if (a == Label::In && b == Label::Out) {
      s.push_back(id);
    } else if (a == Label::Out && b == Label::In) {
      s.push_back(-id);
    } else if (r.candidate) {
      if ((a == Label::In && b == Label::Undecided) || (a == Label::Undecided && b == Label::Out)) s.push_back(id);
      if ((a == Label::Undecided && b == Label::In) || (a == Label::Out && b == Label::Undecided)) s.push_back(-id);
    }
  }
  return s;
}

/// Unary winding costs of the undecided cells and the coverage-weighted
/// disagreement costs; faces towards labeled cells or the exterior fold into
/// the unaries.
inline CutGraph energy_terms(const LabelState& st, const CellComplex& cx, std::span<const FaceRecord> faces,
                             double lambda_v) {
  CutGraph g;
  std::vector<int> node(cx.cells.size(), -1);
  for (std::size_t c = 0; c < cx.cells.size(); ++c) {
    if (st.labels[c] != Label::Undecided) continue;
    node[c] = static_cast<int>(g.cells.size());
    g.cells.push_back(static_cast<int>(c));
  }
  std::vector<OrientedFace> s;
  s.reserve(st.oriented_faces.size());
  for (int id : st.oriented_faces) s.push_back(oriented_face(faces[std::abs(id) - 1], id));
  for (int c : g.cells) {
    const double w = std::clamp(winding_number_approx(cx.cells[c].centroid, s), 0.0, 1.0);
    g.w.push_back(w);
    g.cost_in.push_back(1.0 - w);
    g.cost_out.push_back(w);
  }
  std::map<std::pair<int, int>, double> pair_cost;
  for (const auto& f : faces) {
    const double c = lambda_v * (1.0 - f.coverage);
    const int na = node[f.cell_a];
    const int nb = f.cell_b == kExterior ? -1 : node[f.cell_b];
    if (na < 0 && nb < 0) continue;
    if (na >= 0 && nb >= 0) {
      pair_cost[{std::min(na, nb), std::max(na, nb)}] += c;
      continue;
    }
    const int u = na >= 0 ? na : nb;
    const Label other = detail::side_label(st.labels, na >= 0 ? f.cell_b : f.cell_a);
    (other == Label::In ? g.cost_out : g.cost_in)[u] += c;
  }
  for (const auto& [k, c] : pair_cost) g.pairs.push_back({k.first, k.second, c});
  return g;
}

/// Labels cells outward from the hull: each round solves the cut over the
/// undecided cells and commits those touching the exterior or a labeled
/// cell. Everything is committed once a round reproduces the previous
/// round's labels.
inline LabelState iterate_orientation(const CellComplex& cx, std::span<const FaceRecord> faces,
                                      const OrientParams& params) {
  LabelState st = initialize_orientation(cx, faces);
  const std::size_t n = cx.cells.size();
  std::vector<std::vector<int>> neighbours(n);
  std::vector<char> on_hull(n, 0);
  for (const auto& f : faces) {
    if (f.cell_b == kExterior) {
      on_hull[f.cell_a] = 1;
    } else {
      neighbours[f.cell_a].push_back(f.cell_b);
      neighbours[f.cell_b].push_back(f.cell_a);
    }
  }
  std::vector<Label> previous;
  for (int it = 1; it <= params.max_iter; ++it) {
    st.oriented_faces = oriented_face_set(st.labels, faces);
    IterationRecord rec;
    rec.iteration = it;
    rec.oriented_faces = st.oriented_faces;
    rec.graph = energy_terms(st, cx, faces, params.lambda_v);
    rec.tentative = solve_labels(rec.graph);

    std::vector<Label> proposal(n, Label::Undecided);
    for (std::size_t i = 0; i < rec.graph.size(); ++i) proposal[rec.graph.cells[i]] = rec.tentative[i] ? Label::In : Label::Out;
    bool stable = !previous.empty();
    for (int c : rec.graph.cells) stable = stable && previous[c] == proposal[c];

    std::vector<int> frontier;
    for (int c : rec.graph.cells) {
      bool touches = on_hull[c];
      for (int d : neighbours[c]) touches = touches || st.labels[d] != Label::Undecided;
      if (touches) frontier.push_back(c);
    }
    if (stable || frontier.empty()) {
      for (int c : rec.graph.cells) st.labels[c] = proposal[c];
    } else {
      for (int c : frontier) st.labels[c] = proposal[c];
    }
    previous = std::move(proposal);
    rec.labels = st.labels;
    st.history.push_back(std::move(rec));
    st.iterations = it;
    if (std::none_of(st.labels.begin(), st.labels.end(), [](Label l) { return l == Label::Undecided; })) {
      st.oriented_faces = oriented_face_set(st.labels, faces);
      return st;
    }
  }
  auto summary = [&](std::size_t k) {
    std::string s;
    for (Label l : st.history[k].labels) s += l == Label::In ? 'I' : l == Label::Out ? 'O' : '?';
    return s;
  };
  std::string msg = "labels still changing after " + std::to_string(params.max_iter) + " iterations";
  if (st.history.size() >= 2) msg += " (" + summary(st.history.size() - 2) + " -> " + summary(st.history.size() - 1) + ")";
  throw Error(ErrorKind::NonConvergence, msg);
}

namespace detail {

struct UnionFind {
  std::vector<std::uint32_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

struct Piece {
  std::vector<std::uint32_t> ring;
  int source;
  Vec3 normal;
  bool candidate;
};

inline void drop_repeats(std::vector<std::uint32_t>& ring) {
  std::vector<std::uint32_t> out;
  for (auto v : ring)
    if (out.empty() || out.back() != v) out.push_back(v);
  while (out.size() > 1 && out.front() == out.back()) out.pop_back();
  ring = std::move(out);
}

/// Cancels opposite directed edges among coplanar pieces and traces the
/// remaining boundary. Returns nothing when the union is not a set of
/// simple hole-free loops.
inline std::optional<std::vector<std::vector<std::uint32_t>>> merge_group(const std::vector<const Piece*>& group,
                                                                          const std::vector<Vec3>& verts) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> edges;
  for (const auto* p : group)
    for (std::size_t i = 0; i < p->ring.size(); ++i) edges[{p->ring[i], p->ring[(i + 1) % p->ring.size()]}]++;
  std::map<std::uint32_t, std::uint32_t> next;
  for (const auto& [e, k] : edges) {
    auto rev = edges.find({e.second, e.first});
    const int left = k - (rev == edges.end() ? 0 : rev->second);
    if (left <= 0) continue;
    if (left > 1 || next.count(e.first)) return std::nullopt;
    next[e.first] = e.second;
  }
  std::vector<std::vector<std::uint32_t>> loops;
  std::set<std::uint32_t> seen;
  for (const auto& [start, _] : next) {
    if (seen.count(start)) continue;
    std::vector<std::uint32_t> loop;
    std::uint32_t v = start;
    while (!seen.count(v)) {
      seen.insert(v);
      loop.push_back(v);
      auto it = next.find(v);
      if (it == next.end()) return std::nullopt;
      v = it->second;
    }
    if (v != start || loop.size() < 3) return std::nullopt;
    std::vector<Vec3> pts;
    for (auto i : loop) pts.push_back(verts[i]);
    if (dot(ring_area_vector(pts), group.front()->normal) <= 0.0) return std::nullopt;  // hole
    loops.push_back(std::move(loop));
  }
  return loops;
}

}  // namespace detail

/// Faces between in and out (or exterior) cells, oriented outward, welded,
/// with T-junctions split and coplanar pieces of one plane merged.
inline PolyMesh extract_mesh(const LabelState& st, const CellComplex& cx, std::span<const FaceRecord> faces) {
  if (std::none_of(st.labels.begin(), st.labels.end(), [](Label l) { return l == Label::In; })) {
    throw Error(ErrorKind::EmptySelection, "no cell is labeled inside");
  }
  const double tol = 1e-9 * std::max(cx.space.bounds().diagonal(), 1e-300);

  std::vector<Vec3> raw;
  std::vector<detail::Piece> pieces;
  for (const auto& f : faces) {
    const Label a = st.labels[f.cell_a];
    const Label b = detail::side_label(st.labels, f.cell_b);
    if (a == b || (a != Label::In && b != Label::In)) continue;
    auto ring = f.polygon.vertices;
    Vec3 n = f.polygon.plane.normal;
    if (b == Label::In) {
      std::reverse(ring.begin(), ring.end());
      n = -n;
    }
    detail::Piece p{{}, f.source, n, f.candidate};
    for (const auto& v : ring) {
      p.ring.push_back(static_cast<std::uint32_t>(raw.size()));
      raw.push_back(v);
    }
    pieces.push_back(std::move(p));
  }

  // Weld.
  detail::UnionFind uf(raw.size());
  {
    const KdTree tree(raw);
    for (std::uint32_t i = 0; i < raw.size(); ++i)
      for (auto j : tree.radius(raw[i], tol * tol)) uf.unite(i, j);
  }
  for (auto& p : pieces) {
    for (auto& v : p.ring) v = uf.find(v);
    detail::drop_repeats(p.ring);
  }
  std::erase_if(pieces, [](const detail::Piece& p) { return p.ring.size() < 3; });

  // Split edges at vertices lying on them.
  {
    std::vector<std::uint32_t> used;
    for (const auto& p : pieces) used.insert(used.end(), p.ring.begin(), p.ring.end());
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    std::vector<Vec3> pts;
    for (auto u : used) pts.push_back(raw[u]);
    const KdTree tree(pts);
    for (auto& p : pieces) {
      std::vector<std::uint32_t> out;
      for (std::size_t i = 0; i < p.ring.size(); ++i) {
        const auto a = p.ring[i], b = p.ring[(i + 1) % p.ring.size()];
        out.push_back(a);
        const Vec3 ab = raw[b] - raw[a];
        const double len2 = squared_norm(ab);
        const double r = 0.5 * std::sqrt(len2) + tol;
        std::vector<std::pair<double, std::uint32_t>> on;
        for (auto k : tree.radius((raw[a] + raw[b]) * 0.5, r * r)) {
          const auto c = used[k];
          if (c == a || c == b) continue;
          const double t = dot(raw[c] - raw[a], ab) / len2;
          if (t <= 0.0 || t >= 1.0) continue;
          if (squared_distance(raw[c], raw[a] + ab * t) <= tol * tol) on.push_back({t, c});
        }
        std::sort(on.begin(), on.end());
        for (const auto& [t, c] : on) out.push_back(c);
      }
      p.ring = std::move(out);
    }
  }

  // Merge per (plane, side).
  std::map<std::pair<int, int>, std::vector<const detail::Piece*>> groups;
  std::map<int, Vec3> reference;
  for (const auto& p : pieces) {
    auto it = reference.try_emplace(p.source, p.normal).first;
    groups[{p.source, dot(p.normal, it->second) > 0.0 ? 1 : -1}].push_back(&p);
  }
  PolyMesh mesh;
  std::vector<std::vector<std::uint32_t>> rings;
  for (const auto& [key, group] : groups) {
    const bool candidate = std::all_of(group.begin(), group.end(), [](const auto* p) { return p->candidate; });
    auto merged = group.size() > 1 ? detail::merge_group(group, raw) : std::nullopt;
    if (!merged) {
      merged.emplace();
      for (const auto* p : group) merged->push_back(p->ring);
    }
    for (auto& r : *merged) {
      rings.push_back(std::move(r));
      mesh.face_planes.push_back(key.first);
      mesh.face_candidate.push_back(candidate);
    }
  }

  // Drop vertices that are straight in every face using them.
  std::map<std::uint32_t, bool> removable;
  for (const auto& r : rings)
    for (std::size_t i = 0; i < r.size(); ++i) {
      const Vec3& a = raw[r[(i + r.size() - 1) % r.size()]];
      const Vec3& v = raw[r[i]];
      const Vec3& b = raw[r[(i + 1) % r.size()]];
      const Vec3 ab = b - a;
      const double t = dot(v - a, ab) / squared_norm(ab);
      const bool straight = t > 0.0 && t < 1.0 && squared_distance(v, a + ab * t) <= tol * tol;
      auto [it, fresh] = removable.try_emplace(r[i], straight);
      if (!fresh) it->second = it->second && straight;
    }
  std::map<std::uint32_t, std::uint32_t> index;
  for (auto& r : rings) {
    std::vector<std::uint32_t> f;
    for (auto v : r) {
      if (removable[v]) continue;
      auto [it, fresh] = index.try_emplace(v, static_cast<std::uint32_t>(mesh.vertices.size()));
      if (fresh) mesh.vertices.push_back(raw[v]);
      f.push_back(it->second);
    }
    mesh.faces.push_back(std::move(f));
  }
  return mesh;
}

}  // namespace polyrecon
