#pragma once

// Maximum-weight matching.
//
// mwm_general is the primal-dual blossom method (Edmonds; Galil's O(n^3)
// formulation with Gabow's bookkeeping of least-slack edges), maximising
// total weight without regard to cardinality. mwm_bipartite solves the
// same problem on a two-coloured graph as a dense assignment problem
// (Hungarian method with potentials), padding absent pairs with weight 0.
// enumerate_matchings is the exhaustive oracle used by tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sectornet/errors.hpp"

namespace sectornet {

struct WeightedEdge {
  int u = 0;
  int v = 0;
  double w = 0.0;
};

struct WeightedGraph {
  int vertex_count = 0;
  std::vector<WeightedEdge> edges;
};

struct Matching {
  std::vector<int> edges;  // ascending edge ids
  double weight = 0.0;
};

/// Rejects self-loops, parallel edges, negative or non-finite weights.
inline void validate_weighted_graph(const WeightedGraph& g) {
  std::vector<std::pair<int, int>> seen;
  seen.reserve(g.edges.size());
  for (const auto& e : g.edges) {
    require(e.u >= 0 && e.v >= 0 && e.u < g.vertex_count && e.v < g.vertex_count, ErrorCode::Precondition,
            "edge endpoint out of range");
    require(e.u != e.v, ErrorCode::Precondition, "self-loop");
    require(std::isfinite(e.w) && e.w >= 0.0, ErrorCode::Precondition, "weights must be finite and >= 0");
    seen.push_back(std::minmax(e.u, e.v));
  }
  std::sort(seen.begin(), seen.end());
  require(std::adjacent_find(seen.begin(), seen.end()) == seen.end(), ErrorCode::Precondition,
          "parallel edges");
}

inline bool is_matching(const WeightedGraph& g, std::span<const int> edge_ids) {
  std::vector<char> used(g.vertex_count, 0);
  for (int id : edge_ids) {
    if (id < 0 || id >= static_cast<int>(g.edges.size())) return false;
    const auto& e = g.edges[id];
    if (used[e.u] || used[e.v]) return false;
    used[e.u] = used[e.v] = 1;
  }
  return true;
}

inline Matching make_matching(const WeightedGraph& g, std::vector<int> ids) {
  std::sort(ids.begin(), ids.end());
  Matching m;
  for (int id : ids) m.weight += g.edges[id].w;
  m.edges = std::move(ids);
  return m;
}

namespace detail {

// Endpoint p of edge k is the vertex edges[k][p % 2]; p ^ 1 is the opposite
// endpoint. Vertex duals are stored doubled so that slack needs no halving.
class BlossomMatcher {
 public:
  explicit BlossomMatcher(const WeightedGraph& g)
      : n_(g.vertex_count), m_(static_cast<int>(g.edges.size())), g_(g) {
    endpoint_.resize(2 * m_);
    neighbend_.assign(n_, {});
    double maxweight = 0.0;
    for (int k = 0; k < m_; ++k) {
      const auto& e = g.edges[k];
      endpoint_[2 * k] = e.u;
      endpoint_[2 * k + 1] = e.v;
      neighbend_[e.u].push_back(2 * k + 1);
      neighbend_[e.v].push_back(2 * k);
      maxweight = std::max(maxweight, e.w);
    }
    mate_.assign(n_, -1);
    label_.assign(2 * n_, 0);
    labelend_.assign(2 * n_, -1);
    inblossom_.resize(n_);
    for (int v = 0; v < n_; ++v) inblossom_[v] = v;
    blossomparent_.assign(2 * n_, -1);
    blossomchilds_.assign(2 * n_, {});
    blossomendps_.assign(2 * n_, {});
    blossombase_.assign(2 * n_, -1);
    for (int v = 0; v < n_; ++v) blossombase_[v] = v;
    bestedge_.assign(2 * n_, -1);
    blossombestedges_.assign(2 * n_, {});
    has_bestedges_.assign(2 * n_, 0);
    for (int b = 2 * n_ - 1; b >= n_; --b) unused_.push_back(b);
    dualvar_.assign(2 * n_, 0.0);
    for (int v = 0; v < n_; ++v) dualvar_[v] = maxweight;
    allowedge_.assign(m_, 0);
  }

  std::vector<int> solve() {
    if (m_ == 0) return {};
    for (int stage = 0; stage < n_; ++stage) {
      std::fill(label_.begin(), label_.end(), 0);
      std::fill(bestedge_.begin(), bestedge_.end(), -1);
      for (int b = n_; b < 2 * n_; ++b) {
        blossombestedges_[b].clear();
        has_bestedges_[b] = 0;
      }
      std::fill(allowedge_.begin(), allowedge_.end(), 0);
      queue_.clear();
      for (int v = 0; v < n_; ++v)
        if (mate_[v] == -1 && label_[inblossom_[v]] == 0) assign_label(v, 1, -1);

      bool augmented = false;
      while (true) {
        while (!queue_.empty() && !augmented) {
          const int v = queue_.back();
          queue_.pop_back();
          for (int p : neighbend_[v]) {
            const int k = p / 2;
            const int w = endpoint_[p];
            if (inblossom_[v] == inblossom_[w]) continue;
            double kslack = 0.0;
            if (!allowedge_[k]) {
              kslack = slack(k);
              if (kslack <= 0.0) allowedge_[k] = 1;
            }
            if (allowedge_[k]) {
              if (label_[inblossom_[w]] == 0) {
                assign_label(w, 2, p ^ 1);
              } else if (label_[inblossom_[w]] == 1) {
                const int base = scan_blossom(v, w);
                if (base >= 0) {
                  add_blossom(base, k);
                } else {
                  augment_matching(k);
                  augmented = true;
                  break;
                }
              } else if (label_[w] == 0) {
                label_[w] = 2;
                labelend_[w] = p ^ 1;
              }
            } else if (label_[inblossom_[w]] == 1) {
              const int b = inblossom_[v];
              if (bestedge_[b] == -1 || kslack < slack(bestedge_[b])) bestedge_[b] = k;
            } else if (label_[w] == 0) {
              if (bestedge_[w] == -1 || kslack < slack(bestedge_[w])) bestedge_[w] = k;
            }
          }
        }
        if (augmented) break;

        // Dual adjustment.
        int deltatype = 1;
        double delta = *std::min_element(dualvar_.begin(), dualvar_.begin() + n_);
        int deltaedge = -1;
        int deltablossom = -1;
        for (int v = 0; v < n_; ++v) {
          if (label_[inblossom_[v]] == 0 && bestedge_[v] != -1) {
            const double d = slack(bestedge_[v]);
            if (d < delta) {
              delta = d;
              deltatype = 2;
              deltaedge = bestedge_[v];
            }
          }
        }
        for (int b = 0; b < 2 * n_; ++b) {
          if (blossomparent_[b] == -1 && label_[b] == 1 && bestedge_[b] != -1) {
            const double d = slack(bestedge_[b]) / 2.0;
            if (d < delta) {
              delta = d;
              deltatype = 3;
              deltaedge = bestedge_[b];
            }
          }
        }
        for (int b = n_; b < 2 * n_; ++b) {
          if (blossombase_[b] >= 0 && blossomparent_[b] == -1 && label_[b] == 2 && dualvar_[b] < delta) {
            delta = dualvar_[b];
            deltatype = 4;
            deltablossom = b;
          }
        }

        for (int v = 0; v < n_; ++v) {
          const int lb = label_[inblossom_[v]];
          if (lb == 1) {
            dualvar_[v] -= delta;
          } else if (lb == 2) {
            dualvar_[v] += delta;
          }
        }
        for (int b = n_; b < 2 * n_; ++b) {
          if (blossombase_[b] >= 0 && blossomparent_[b] == -1) {
            if (label_[b] == 1) {
              dualvar_[b] += delta;
            } else if (label_[b] == 2) {
              dualvar_[b] -= delta;
            }
          }
        }

        if (deltatype == 1) break;
        if (deltatype == 2) {
          allowedge_[deltaedge] = 1;
          int i = g_.edges[deltaedge].u;
          int j = g_.edges[deltaedge].v;
          if (label_[inblossom_[i]] == 0) std::swap(i, j);
          queue_.push_back(i);
        } else if (deltatype == 3) {
          allowedge_[deltaedge] = 1;
          queue_.push_back(g_.edges[deltaedge].u);
        } else {
          expand_blossom(deltablossom, false);
        }
      }
      if (!augmented) break;

      for (int b = n_; b < 2 * n_; ++b) {
        if (blossomparent_[b] == -1 && blossombase_[b] >= 0 && label_[b] == 1 && dualvar_[b] == 0.0)
          expand_blossom(b, true);
      }
    }

    std::vector<int> result;
    for (int v = 0; v < n_; ++v) {
      if (mate_[v] >= 0) {
        const int k = mate_[v] / 2;
        if (g_.edges[k].u == v || g_.edges[k].v == v) {
          if (std::min(g_.edges[k].u, g_.edges[k].v) == v) result.push_back(k);
        }
      }
    }
    return result;
  }

 private:
  double slack(int k) const {
    const auto& e = g_.edges[k];
    return dualvar_[e.u] + dualvar_[e.v] - 2.0 * e.w;
  }

  void blossom_leaves(int b, std::vector<int>& out) const {
    if (b < n_) {
      out.push_back(b);
      return;
    }
    for (int t : blossomchilds_[b]) blossom_leaves(t, out);
  }

  std::vector<int> leaves(int b) const {
    std::vector<int> out;
    blossom_leaves(b, out);
    return out;
  }

  void assign_label(int w, int t, int p) {
    const int b = inblossom_[w];
    label_[w] = label_[b] = t;
    labelend_[w] = labelend_[b] = p;
    bestedge_[w] = bestedge_[b] = -1;
    if (t == 1) {
      blossom_leaves(b, queue_);
    } else if (t == 2) {
      const int base = blossombase_[b];
      assign_label(endpoint_[mate_[base]], 1, mate_[base] ^ 1);
    }
  }

  int scan_blossom(int v, int w) {
    std::vector<int> path;
    int base = -1;
    while (v != -1 || w != -1) {
      int b = inblossom_[v];
      if (label_[b] & 4) {
        base = blossombase_[b];
        break;
      }
      path.push_back(b);
      label_[b] = 5;
      if (labelend_[b] == -1) {
        v = -1;
      } else {
        v = endpoint_[labelend_[b]];
        b = inblossom_[v];
        v = endpoint_[labelend_[b]];
      }
      if (w != -1) std::swap(v, w);
    }
    for (int b : path) label_[b] = 1;
    return base;
  }

  void add_blossom(int base, int k) {
    int v = g_.edges[k].u;
    int w = g_.edges[k].v;
    const int bb = inblossom_[base];
    int bv = inblossom_[v];
    int bw = inblossom_[w];
    const int b = unused_.back();
    unused_.pop_back();
    blossombase_[b] = base;
    blossomparent_[b] = -1;
    blossomparent_[bb] = b;
    auto& path = blossomchilds_[b];
    auto& endps = blossomendps_[b];
    path.clear();
    endps.clear();
    while (bv != bb) {
      blossomparent_[bv] = b;
      path.push_back(bv);
      endps.push_back(labelend_[bv]);
      v = endpoint_[labelend_[bv]];
      bv = inblossom_[v];
    }
    path.push_back(bb);
    std::reverse(path.begin(), path.end());
    std::reverse(endps.begin(), endps.end());
    endps.push_back(2 * k);
    while (bw != bb) {
      blossomparent_[bw] = b;
      path.push_back(bw);
      endps.push_back(labelend_[bw] ^ 1);
      w = endpoint_[labelend_[bw]];
      bw = inblossom_[w];
    }
    label_[b] = 1;
    labelend_[b] = labelend_[bb];
    dualvar_[b] = 0.0;
    for (int leaf : leaves(b)) {
      if (label_[inblossom_[leaf]] == 2) queue_.push_back(leaf);
      inblossom_[leaf] = b;
    }

    std::vector<int> bestedgeto(2 * n_, -1);
    for (int sub : path) {
      std::vector<int> candidates;
      if (!has_bestedges_[sub]) {
        for (int leaf : leaves(sub))
          for (int p : neighbend_[leaf]) candidates.push_back(p / 2);
      } else {
        candidates = blossombestedges_[sub];
      }
      for (int kk : candidates) {
        int i = g_.edges[kk].u;
        int j = g_.edges[kk].v;
        if (inblossom_[j] == b) std::swap(i, j);
        const int bj = inblossom_[j];
        if (bj != b && label_[bj] == 1 && (bestedgeto[bj] == -1 || slack(kk) < slack(bestedgeto[bj])))
          bestedgeto[bj] = kk;
      }
      blossombestedges_[sub].clear();
      has_bestedges_[sub] = 0;
      bestedge_[sub] = -1;
    }
    blossombestedges_[b].clear();
    for (int kk : bestedgeto)
      if (kk != -1) blossombestedges_[b].push_back(kk);
    has_bestedges_[b] = 1;
    bestedge_[b] = -1;
    for (int kk : blossombestedges_[b])
      if (bestedge_[b] == -1 || slack(kk) < slack(bestedge_[b])) bestedge_[b] = kk;
  }

  void expand_blossom(int b, bool endstage) {
    const std::vector<int> childs = blossomchilds_[b];
    for (int s : childs) {
      blossomparent_[s] = -1;
      if (s < n_) {
        inblossom_[s] = s;
      } else if (endstage && dualvar_[s] == 0.0) {
        expand_blossom(s, endstage);
      } else {
        for (int leaf : leaves(s)) inblossom_[leaf] = s;
      }
    }
    if (!endstage && label_[b] == 2) {
      const auto& ch = blossomchilds_[b];
      const auto& ep = blossomendps_[b];
      const int len = static_cast<int>(ch.size());
      auto at = [len](const std::vector<int>& vec, int idx) { return vec[((idx % len) + len) % len]; };
      const int entrychild = inblossom_[endpoint_[labelend_[b] ^ 1]];
      int j = static_cast<int>(std::find(ch.begin(), ch.end(), entrychild) - ch.begin());
      int jstep;
      int endptrick;
      if (j & 1) {
        j -= len;
        jstep = 1;
        endptrick = 0;
      } else {
        jstep = -1;
        endptrick = 1;
      }
      int p = labelend_[b];
      while (j != 0) {
        label_[endpoint_[p ^ 1]] = 0;
        label_[endpoint_[at(ep, j - endptrick) ^ endptrick ^ 1]] = 0;
        assign_label(endpoint_[p ^ 1], 2, p);
        allowedge_[at(ep, j - endptrick) / 2] = 1;
        j += jstep;
        p = at(ep, j - endptrick) ^ endptrick;
        allowedge_[p / 2] = 1;
        j += jstep;
      }
      int bv = at(ch, j);
      label_[endpoint_[p ^ 1]] = label_[bv] = 2;
      labelend_[endpoint_[p ^ 1]] = labelend_[bv] = p;
      bestedge_[bv] = -1;
      j += jstep;
      while (at(ch, j) != entrychild) {
        bv = at(ch, j);
        if (label_[bv] == 1) {
          j += jstep;
          continue;
        }
        int found = -1;
        for (int leaf : leaves(bv)) {
          if (label_[leaf] != 0) {
            found = leaf;
            break;
          }
        }
        if (found >= 0) {
          label_[found] = 0;
          label_[endpoint_[mate_[blossombase_[bv]]]] = 0;
          assign_label(found, 2, labelend_[found]);
        }
        j += jstep;
      }
    }
    label_[b] = labelend_[b] = -1;
    blossomchilds_[b].clear();
    blossomendps_[b].clear();
    blossombase_[b] = -1;
    blossombestedges_[b].clear();
    has_bestedges_[b] = 0;
    bestedge_[b] = -1;
    unused_.push_back(b);
  }

  void augment_blossom(int b, int v) {
    int t = v;
    while (blossomparent_[t] != b) t = blossomparent_[t];
    if (t >= n_) augment_blossom(t, v);
    auto& ch = blossomchilds_[b];
    auto& ep = blossomendps_[b];
    const int len = static_cast<int>(ch.size());
    auto idx = [len](int i) { return ((i % len) + len) % len; };
    const int i = static_cast<int>(std::find(ch.begin(), ch.end(), t) - ch.begin());
    int j = i;
    int jstep;
    int endptrick;
    if (i & 1) {
      j -= len;
      jstep = 1;
      endptrick = 0;
    } else {
      jstep = -1;
      endptrick = 1;
    }
    while (j != 0) {
      j += jstep;
      t = ch[idx(j)];
      const int p = ep[idx(j - endptrick)] ^ endptrick;
      if (t >= n_) augment_blossom(t, endpoint_[p]);
      j += jstep;
      t = ch[idx(j)];
      if (t >= n_) augment_blossom(t, endpoint_[p ^ 1]);
      mate_[endpoint_[p]] = p ^ 1;
      mate_[endpoint_[p ^ 1]] = p;
    }
    std::rotate(ch.begin(), ch.begin() + i, ch.end());
    std::rotate(ep.begin(), ep.begin() + i, ep.end());
    blossombase_[b] = blossombase_[ch[0]];
  }

  void augment_matching(int k) {
    const int v = g_.edges[k].u;
    const int w = g_.edges[k].v;
    const int starts[2][2] = {{v, 2 * k + 1}, {w, 2 * k}};
    for (const auto& start : starts) {
      int s = start[0];
      int p = start[1];
      while (true) {
        const int bs = inblossom_[s];
        if (bs >= n_) augment_blossom(bs, s);
        mate_[s] = p;
        if (labelend_[bs] == -1) break;
        const int t = endpoint_[labelend_[bs]];
        const int bt = inblossom_[t];
        s = endpoint_[labelend_[bt]];
        const int j = endpoint_[labelend_[bt] ^ 1];
        if (bt >= n_) augment_blossom(bt, j);
        mate_[j] = labelend_[bt];
        p = labelend_[bt] ^ 1;
      }
    }
  }

  int n_;
  int m_;
  const WeightedGraph& g_;
  std::vector<int> endpoint_;
  std::vector<std::vector<int>> neighbend_;
  std::vector<int> mate_;
  std::vector<int> label_;
  std::vector<int> labelend_;
  std::vector<int> inblossom_;
  std::vector<int> blossomparent_;
  std::vector<std::vector<int>> blossomchilds_;
  std::vector<std::vector<int>> blossomendps_;
  std::vector<int> blossombase_;
  std::vector<int> bestedge_;
  std::vector<std::vector<int>> blossombestedges_;
  std::vector<char> has_bestedges_;
  std::vector<int> unused_;
  std::vector<double> dualvar_;
  std::vector<char> allowedge_;
  std::vector<int> queue_;
};

}  // namespace detail

/// Maximum-weight matching on a general graph.
inline Matching mwm_general(const WeightedGraph& g) {
  validate_weighted_graph(g);
  detail::BlossomMatcher matcher(g);
  auto ids = matcher.solve();
  // Zero-weight members do not change the optimum; drop them.
  std::erase_if(ids, [&](int id) { return g.edges[id].w <= 0.0; });
  return make_matching(g, std::move(ids));
}

/// Maximum-weight matching on a graph with a proper two-colouring
/// (`side[v]` in {0, 1}; vertices without edges may carry any value).
inline Matching mwm_bipartite(const WeightedGraph& g, std::span<const int> side) {
  validate_weighted_graph(g);
  require(static_cast<int>(side.size()) == g.vertex_count, ErrorCode::InvalidBipartition,
          "colouring size does not match the vertex count");
  for (const auto& e : g.edges) {
    if (side[e.u] == side[e.v] || (side[e.u] != 0 && side[e.u] != 1) || (side[e.v] != 0 && side[e.v] != 1))
      throw Error(ErrorCode::InvalidBipartition, "edge " + std::to_string(e.u) + "-" + std::to_string(e.v) +
                                                     " is monochromatic");
  }
  if (g.edges.empty()) return {};

  // Index vertices that carry edges on either side.
  std::vector<int> local(g.vertex_count, -1);
  int count[2] = {0, 0};
  for (const auto& e : g.edges) {
    for (int v : {e.u, e.v})
      if (local[v] < 0) local[v] = count[side[v]]++;
  }
  // Rows are the smaller side so that rows <= columns.
  const int row_side = count[0] <= count[1] ? 0 : 1;
  const int rows = count[row_side];
  const int cols = count[1 - row_side];

  // cost[i][j] = -w for an edge, 0 otherwise (pairing along a non-edge
  // means "unmatched"). 1-indexed as in the classical formulation.
  std::vector<double> cost(static_cast<std::size_t>(rows + 1) * (cols + 1), 0.0);
  std::vector<int> edge_at(static_cast<std::size_t>(rows + 1) * (cols + 1), -1);
  for (int k = 0; k < static_cast<int>(g.edges.size()); ++k) {
    const auto& e = g.edges[k];
    const int r = side[e.u] == row_side ? e.u : e.v;
    const int c = r == e.u ? e.v : e.u;
    const std::size_t at = static_cast<std::size_t>(local[r] + 1) * (cols + 1) + local[c] + 1;
    cost[at] = -e.w;
    edge_at[at] = k;
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0), minv(cols + 1);
  std::vector<int> p(cols + 1, 0), way(cols + 1, 0);
  std::vector<char> used(cols + 1);
  for (int i = 1; i <= rows; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      const double* row = &cost[static_cast<std::size_t>(i0) * (cols + 1)];
      for (int j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const double cur = row[j] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> ids;
  for (int j = 1; j <= cols; ++j) {
    if (p[j] == 0) continue;
    const int k = edge_at[static_cast<std::size_t>(p[j]) * (cols + 1) + j];
    if (k >= 0 && g.edges[k].w > 0.0) ids.push_back(k);
  }
  return make_matching(g, std::move(ids));
}

/// Calls `visit` once for every matching (including the empty one).
inline void for_each_matching(const WeightedGraph& g, const std::function<void(const Matching&)>& visit) {
  if (g.edges.size() > 22)
    throw Error(ErrorCode::SearchSpaceTooLarge, "matching enumeration limited to 22 edges");
  std::vector<char> used(g.vertex_count, 0);
  Matching current;
  const int m = static_cast<int>(g.edges.size());
  std::function<void(int)> rec = [&](int k) {
    if (k == m) {
      visit(current);
      return;
    }
    rec(k + 1);
    const auto& e = g.edges[k];
    if (!used[e.u] && !used[e.v]) {
      used[e.u] = used[e.v] = 1;
      current.edges.push_back(k);
      current.weight += e.w;
      rec(k + 1);
      current.weight -= e.w;
      current.edges.pop_back();
      used[e.u] = used[e.v] = 0;
    }
  };
  rec(0);
}

inline std::vector<Matching> enumerate_matchings(const WeightedGraph& g) {
  std::vector<Matching> out;
  for_each_matching(g, [&](const Matching& m) { out.push_back(make_matching(g, m.edges)); });
  return out;
}

}  // namespace sectornet
