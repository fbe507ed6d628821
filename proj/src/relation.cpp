#include "graspkit/relation.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <set>
#include <sstream>

#include "graspkit/error.hpp"

namespace graspkit {

namespace {

std::string pair_text(int a, int b) {
  std::ostringstream os;
  os << "(" << a << ", " << b << ")";
  return os.str();
}

// Returns the edges of one directed cycle, or nothing if the graph is acyclic.
std::optional<std::vector<std::size_t>> find_cycle(const ManipulationGraph& g) {
  std::map<int, std::vector<std::size_t>> out_edges;
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    out_edges[g.edges[e].above].push_back(e);
  }
  enum class Mark { kWhite, kGrey, kBlack };
  std::map<int, Mark> mark;
  for (int n : g.nodes) mark[n] = Mark::kWhite;
  std::vector<std::size_t> stack;  // edges on the current DFS path
  std::optional<std::vector<std::size_t>> found;

  std::function<bool(int)> visit = [&](int n) {
    mark[n] = Mark::kGrey;
    for (std::size_t e : out_edges[n]) {
      const int m = g.edges[e].below;
      if (mark[m] == Mark::kGrey) {
        // Walk back along the path to where the cycle closes.
        std::vector<std::size_t> cycle{e};
        for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
          cycle.push_back(*it);
          if (g.edges[*it].above == m) break;
        }
        found = std::move(cycle);
        return true;
      }
      if (mark[m] == Mark::kWhite) {
        stack.push_back(e);
        if (visit(m)) return true;
        stack.pop_back();
      }
    }
    mark[n] = Mark::kBlack;
    return false;
  };
  for (int n : g.nodes) {
    if (mark[n] == Mark::kWhite && visit(n)) break;
  }
  return found;
}

}  // namespace

RelationMatrix::RelationMatrix(std::vector<int> ids,
                               std::span<const RelationPrediction> preds)
    : ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  if (std::adjacent_find(ids_.begin(), ids_.end()) != ids_.end()) {
    throw Error(ErrorKind::kParse, "duplicate object id in relation matrix");
  }
  const std::set<int> known(ids_.begin(), ids_.end());
  for (const auto& p : preds) {
    if (!known.count(p.first) || !known.count(p.second)) {
      throw Error(ErrorKind::kParse,
                  "relation refers to unknown object " + pair_text(p.first, p.second));
    }
    try {
      validate_relation_prediction(p);
    } catch (const Error& e) {
      throw Error(ErrorKind::kParse, e.what());
    }
    if (!probs_.emplace(std::make_pair(p.first, p.second), p.probs).second) {
      throw Error(ErrorKind::kParse,
                  "duplicate relation for pair " + pair_text(p.first, p.second));
    }
  }
  for (int a : ids_) {
    for (int b : ids_) {
      if (a != b && !probs_.count({a, b})) {
        throw Error(ErrorKind::kParse,
                    "missing relation for ordered pair " + pair_text(a, b));
      }
    }
  }
}

const std::array<double, 3>& RelationMatrix::at(int first, int second) const {
  const auto it = probs_.find({first, second});
  if (it == probs_.end()) {
    throw Error(ErrorKind::kInvalidArgument,
                "no relation for pair " + pair_text(first, second));
  }
  return it->second;
}

std::vector<PairLabel> symmetrize(const RelationMatrix& m) {
  std::vector<PairLabel> out;
  const auto& ids = m.ids();
  for (std::size_t a = 0; a < ids.size(); ++a) {
    for (std::size_t b = a + 1; b < ids.size(); ++b) {
      const auto& p = m.at(ids[a], ids[b]);
      const auto& q = m.at(ids[b], ids[a]);
      const double none = 0.5 * (p[kRelNone] + q[kRelNone]);
      const double above = 0.5 * (p[kRelFirstAbove] + q[kRelFirstBelow]);
      const double below = 0.5 * (p[kRelFirstBelow] + q[kRelFirstAbove]);
      PairLabel l{ids[a], ids[b], kRelNone, none};
      // A strict winner is needed to leave `none`; an above/below tie stays
      // `none` so the result does not depend on which id comes first.
      if (above > none && above > below) {
        l.label = kRelFirstAbove;
        l.confidence = above;
      } else if (below > none && below > above) {
        l.label = kRelFirstBelow;
        l.confidence = below;
      }
      out.push_back(l);
    }
  }
  return out;
}

ManipulationGraph build_graph(std::vector<int> nodes,
                              std::span<const PairLabel> labels) {
  ManipulationGraph g;
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  g.nodes = std::move(nodes);
  for (const auto& l : labels) {
    if (l.label == kRelFirstAbove) {
      g.edges.push_back({l.first, l.second, l.confidence});
    } else if (l.label == kRelFirstBelow) {
      g.edges.push_back({l.second, l.first, l.confidence});
    }
  }
  while (auto cycle = find_cycle(g)) {
    std::size_t weakest = cycle->front();
    for (std::size_t e : *cycle) {
      const auto& c = g.edges[e];
      const auto& w = g.edges[weakest];
      if (c.confidence < w.confidence ||
          (c.confidence == w.confidence &&
           std::make_pair(c.above, c.below) < std::make_pair(w.above, w.below))) {
        weakest = e;
      }
    }
    g.deleted.push_back(g.edges[weakest]);
    g.edges.erase(g.edges.begin() + static_cast<std::ptrdiff_t>(weakest));
  }
  return g;
}

bool is_acyclic(const ManipulationGraph& g) { return !find_cycle(g).has_value(); }

std::vector<int> leaves(const ManipulationGraph& g) {
  std::set<int> covered;
  for (const auto& e : g.edges) covered.insert(e.below);
  std::vector<int> out;
  for (int n : g.nodes) {
    if (!covered.count(n)) out.push_back(n);
  }
  return out;
}

std::vector<int> ancestors(const ManipulationGraph& g, int node) {
  std::set<int> seen;
  std::vector<int> frontier{node};
  while (!frontier.empty()) {
    const int cur = frontier.back();
    frontier.pop_back();
    for (const auto& e : g.edges) {
      if (e.below == cur && e.above != node && seen.insert(e.above).second) {
        frontier.push_back(e.above);
      }
    }
  }
  return {seen.begin(), seen.end()};
}

GraspAction next_action(const ManipulationGraph& g,
                        std::span<const PerceivedObject> detections,
                        const Target& target) {
  if (detections.empty()) {
    throw Error(ErrorKind::kEmptyScene, "no objects detected");
  }
  std::map<int, double> score;
  for (const auto& d : detections) score[d.detection.instance_id] = d.detection.score;

  GraspAction action;
  std::optional<int> target_id;
  if (const int* id = std::get_if<int>(&target)) {
    if (score.count(*id)) target_id = *id;
  } else {
    const auto& category = std::get<std::string>(target);
    int matches = 0;
    const PerceivedObject* best = nullptr;
    for (const auto& d : detections) {
      if (d.detection.category != category) continue;
      ++matches;
      if (!best || d.detection.score > best->detection.score ||
          (d.detection.score == best->detection.score &&
           d.detection.instance_id < best->detection.instance_id)) {
        best = &d;
      }
    }
    if (best) target_id = best->detection.instance_id;
    action.target_ambiguous = matches > 1;
  }

  // Highest score first, lower id on ties.
  auto pick = [&](const std::vector<int>& candidates) {
    int best = candidates.front();
    for (int c : candidates) {
      const double sc = score.count(c) ? score.at(c) : 0.0;
      const double sb = score.count(best) ? score.at(best) : 0.0;
      if (sc > sb || (sc == sb && c < best)) best = c;
    }
    return best;
  };

  if (!target_id) {
    const auto top = leaves(g);
    if (top.empty()) {
      throw Error(ErrorKind::kEmptyScene, "manipulation graph has no leaves");
    }
    action.object = pick(top);
    return action;
  }

  action.target_detected = true;
  const auto above = ancestors(g, *target_id);
  if (above.empty()) {
    action.object = *target_id;
    action.is_final_target = true;
    return action;
  }
  // Every ancestor's own ancestors are ancestors of the target too, so a
  // global leaf test is the same as a leaf test restricted to the set.
  const auto all_leaves = leaves(g);
  std::vector<int> candidates;
  std::set_intersection(above.begin(), above.end(), all_leaves.begin(),
                        all_leaves.end(), std::back_inserter(candidates));
  action.object = pick(candidates);
  return action;
}

ManipulationGraph reason(const Perception& perception) {
  std::vector<int> ids;
  for (const auto& o : perception.objects) ids.push_back(o.detection.instance_id);
  const RelationMatrix m(ids, perception.relations);
  return build_graph(ids, symmetrize(m));
}

}  // namespace graspkit
