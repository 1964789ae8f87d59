//! Greedy permanence-loss deceptor.
//!
//! Each step applies whichever legal update loses the most network permanence:
//! an inter-community edge added at a node of the target community, or an
//! intra-community edge of the target deleted (both endpoints of degree at
//! least 2). Additions win ties. The community labels are frozen at their
//! input values for the whole run.
//!
//! The search is incremental. An addition `(u, v)` with `u` in the target and
//! `v` in community `D` loses `a(u, D) + b(v)`: `u`'s drop depends on `D` only
//! through whether `D` is one of `u`'s maximum-pull communities, and `v`'s drop
//! only on `v` itself. Both sides are kept in ordered sets, so the best
//! non-adjacent pair is found by scanning from the top. Deletion losses are
//! cached per edge and recomputed only within two hops of the last update.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::par::Exec;
use crate::partition::{CommunityId, Partition};
use crate::permanence::{pull_of, Pull};
use crate::plan::{Budget, UpdatePlan};
use crate::update::{EdgeUpdate, UpdateKind};

/// Losses at or below this (in summed node-permanence units) count as zero.
const MIN_GAIN: f64 = 1e-14;

#[derive(Debug, Clone, Copy)]
struct Ranked<K> {
    score: f64,
    key: K,
}

impl<K: Ord> Ord for Ranked<K> {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .score
            .total_cmp(&self.score)
            .then_with(|| self.key.cmp(&other.key))
    }
}

impl<K: Ord> PartialOrd for Ranked<K> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<K: Ord> PartialEq for Ranked<K> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<K: Ord> Eq for Ranked<K> {}

type Pair = (NodeId, NodeId);

#[derive(Debug, Clone, Copy)]
struct Candidate {
    value: f64,
    u: NodeId,
    v: NodeId,
}

impl Candidate {
    fn beats(&self, other: &Option<Candidate>) -> bool {
        match other {
            None => true,
            Some(o) => {
                self.value > o.value || (self.value == o.value && (self.u, self.v) < (o.u, o.v))
            }
        }
    }
}

/// Addition-side summary of a node in the target community.
#[derive(Debug, Clone, Default)]
struct SourceSide {
    lo: f64,
    hi: f64,
    max_pull: Vec<CommunityId>,
}

/// Incremental search state for one target community.
struct Engine<'p> {
    graph: Graph,
    part: &'p Partition,
    target: CommunityId,
    pulls: Vec<Pull>,
    sources: HashMap<NodeId, SourceSide>,
    lo: BTreeSet<Ranked<NodeId>>,
    hi: HashMap<CommunityId, BTreeSet<Ranked<NodeId>>>,
    sink_score: Vec<f64>,
    sinks: BTreeSet<Ranked<NodeId>>,
    sinks_by: HashMap<CommunityId, BTreeSet<Ranked<NodeId>>>,
    bound_of: HashMap<CommunityId, f64>,
    bounds: BTreeSet<Ranked<CommunityId>>,
    del_score: HashMap<Pair, f64>,
    dels: BTreeSet<Ranked<Pair>>,
}

fn pairs(k: usize) -> f64 {
    (k * k.saturating_sub(1) / 2) as f64
}

impl<'p> Engine<'p> {
    fn new(g: &Graph, part: &'p Partition, target: CommunityId, exec: Exec) -> Self {
        let n = g.node_count();
        let pulls = exec.map((0..n).collect(), |v| {
            if part.label(v) == target {
                pull_of(g, part, v)
            } else {
                light_pull(g, part, v)
            }
        });
        let mut engine = Self {
            graph: g.clone(),
            part,
            target,
            pulls,
            sources: HashMap::new(),
            lo: BTreeSet::new(),
            hi: HashMap::new(),
            sink_score: vec![0.0; n],
            sinks: BTreeSet::new(),
            sinks_by: HashMap::new(),
            bound_of: HashMap::new(),
            bounds: BTreeSet::new(),
            del_score: HashMap::new(),
            dels: BTreeSet::new(),
        };
        for v in 0..n {
            engine.insert_addition_node(v);
        }
        let communities: Vec<CommunityId> = engine.hi.keys().copied().collect();
        for c in communities {
            engine.update_bound(c);
        }
        let mut intra: Vec<Pair> = Vec::new();
        for &u in part.members(target) {
            for &v in g.neighbors(u) {
                if u < v && part.label(v) == target {
                    intra.push((u, v));
                }
            }
        }
        let scored = {
            let e = &engine;
            exec.map(intra, |pair| (pair, e.deletion_value(pair)))
        };
        for (pair, value) in scored {
            if let Some(value) = value {
                engine.del_score.insert(pair, value);
                engine.dels.insert(Ranked {
                    score: value,
                    key: pair,
                });
            }
        }
        engine
    }

    fn in_target(&self, v: NodeId) -> bool {
        self.part.label(v) == self.target
    }

    fn neighbors_in(&self, v: NodeId, c: CommunityId) -> usize {
        self.graph
            .neighbors(v)
            .iter()
            .filter(|&&w| self.part.label(w) == c)
            .count()
    }

    fn insert_addition_node(&mut self, v: NodeId) {
        let pull = self.pulls[v];
        if self.in_target(v) {
            let mut hist: HashMap<CommunityId, usize> = HashMap::new();
            for &w in self.graph.neighbors(v) {
                let c = self.part.label(w);
                if c != self.target {
                    *hist.entry(c).or_insert(0) += 1;
                }
            }
            let mut max_pull: Vec<CommunityId> = if pull.external_max == 0 {
                Vec::new()
            } else {
                hist.iter()
                    .filter(|&(_, &k)| k == pull.external_max)
                    .map(|(&c, _)| c)
                    .collect()
            };
            max_pull.sort_unstable();
            let side = SourceSide {
                lo: pull.external_gain_drop(0),
                hi: pull.external_gain_drop(pull.external_max),
                max_pull,
            };
            self.lo.insert(Ranked {
                score: side.lo,
                key: v,
            });
            for &c in &side.max_pull {
                self.hi.entry(c).or_default().insert(Ranked {
                    score: side.hi,
                    key: v,
                });
            }
            self.sources.insert(v, side);
        } else {
            let into = self.neighbors_in(v, self.target);
            let score = pull.external_gain_drop(into);
            self.sink_score[v] = score;
            let entry = Ranked { score, key: v };
            self.sinks.insert(entry);
            self.sinks_by
                .entry(self.part.label(v))
                .or_default()
                .insert(entry);
        }
    }

    /// Removes `v` from the addition structures; returns communities whose
    /// pair bound may have changed.
    fn remove_addition_node(&mut self, v: NodeId) -> Vec<CommunityId> {
        if self.in_target(v) {
            let side = self.sources.remove(&v).unwrap_or_default();
            self.lo.remove(&Ranked {
                score: side.lo,
                key: v,
            });
            for &c in &side.max_pull {
                if let Some(set) = self.hi.get_mut(&c) {
                    set.remove(&Ranked {
                        score: side.hi,
                        key: v,
                    });
                }
            }
            side.max_pull
        } else {
            let entry = Ranked {
                score: self.sink_score[v],
                key: v,
            };
            self.sinks.remove(&entry);
            let c = self.part.label(v);
            if let Some(set) = self.sinks_by.get_mut(&c) {
                set.remove(&entry);
            }
            vec![c]
        }
    }

    fn update_bound(&mut self, c: CommunityId) {
        if let Some(old) = self.bound_of.remove(&c) {
            self.bounds.remove(&Ranked { score: old, key: c });
        }
        let top_hi = self.hi.get(&c).and_then(|s| s.first()).map(|r| r.score);
        let top_sink = self
            .sinks_by
            .get(&c)
            .and_then(|s| s.first())
            .map(|r| r.score);
        if let (Some(a), Some(b)) = (top_hi, top_sink) {
            self.bound_of.insert(c, a + b);
            self.bounds.insert(Ranked {
                score: a + b,
                key: c,
            });
        }
    }

    fn refresh_addition_node(&mut self, v: NodeId) {
        let mut touched = self.remove_addition_node(v);
        self.insert_addition_node(v);
        if let Some(side) = self.sources.get(&v) {
            touched.extend(side.max_pull.iter().copied());
        } else {
            touched.push(self.part.label(v));
        }
        touched.sort_unstable();
        touched.dedup();
        for c in touched {
            self.update_bound(c);
        }
    }

    /// Exact summed permanence drop of deleting the intra-target edge `(x, y)`,
    /// or `None` if it is not a candidate.
    fn deletion_value(&self, (x, y): Pair) -> Option<f64> {
        let g = &self.graph;
        if !self.in_target(x)
            || !self.in_target(y)
            || !g.has_edge(x, y)
            || g.degree(x) < 2
            || g.degree(y) < 2
        {
            return None;
        }
        let mut shared = 0;
        let mut third = 0.0;
        for w in g.common_neighbors(x, y) {
            if self.in_target(w) {
                shared += 1;
                third += 1.0 / pairs(self.pulls[w].internal);
            }
        }
        Some(
            self.pulls[x].internal_loss_drop(shared)
                + self.pulls[y].internal_loss_drop(shared)
                + third,
        )
    }

    fn refresh_deletion(&mut self, pair: Pair) {
        if let Some(old) = self.del_score.remove(&pair) {
            self.dels.remove(&Ranked {
                score: old,
                key: pair,
            });
        }
        if let Some(value) = self.deletion_value(pair) {
            self.del_score.insert(pair, value);
            self.dels.insert(Ranked {
                score: value,
                key: pair,
            });
        }
    }

    fn best_deletion(&self) -> Option<Candidate> {
        self.dels.first().map(|r| Candidate {
            value: r.score,
            u: r.key.0,
            v: r.key.1,
        })
    }

    /// Highest-value pair `(u, v)` with `u` from `sources`, `v` from `sinks`,
    /// not adjacent, given fixed per-side scores.
    fn scan_pairs<'a>(
        &self,
        sources: impl Iterator<Item = &'a Ranked<NodeId>>,
        sinks: &BTreeSet<Ranked<NodeId>>,
        best: &mut Option<Candidate>,
    ) {
        let Some(top_sink) = sinks.first().map(|r| r.score) else {
            return;
        };
        for src in sources {
            let bound = src.score + top_sink;
            match best {
                Some(b) if bound < b.value => break,
                Some(b) if bound == b.value && src.key > b.u => continue,
                _ => {}
            }
            for sink in sinks {
                let value = src.score + sink.score;
                if matches!(best, Some(b) if value < b.value) {
                    break;
                }
                if self.graph.has_edge(src.key, sink.key) {
                    continue;
                }
                let cand = Candidate {
                    value,
                    u: src.key,
                    v: sink.key,
                };
                if cand.beats(best) {
                    *best = Some(cand);
                }
                break;
            }
        }
    }

    fn best_addition(&self) -> Option<Candidate> {
        let mut best = None;
        // Every pair at the non-raising rate: a lower bound for pairs into a
        // max-pull community, exact for the rest.
        self.scan_pairs(self.lo.iter(), &self.sinks, &mut best);
        // Pairs into a max-pull community at the raised rate.
        for bound in &self.bounds {
            if matches!(best, Some(b) if bound.score < b.value) {
                break;
            }
            let c = bound.key;
            if let (Some(hi), Some(sinks)) = (self.hi.get(&c), self.sinks_by.get(&c)) {
                self.scan_pairs(hi.iter(), sinks, &mut best);
            }
        }
        best.map(|c| Candidate {
            value: self.addition_value(c.u, c.v),
            ..c
        })
    }

    fn addition_value(&self, u: NodeId, v: NodeId) -> f64 {
        let side = &self.sources[&u];
        let source = if side.max_pull.binary_search(&self.part.label(v)).is_ok() {
            side.hi
        } else {
            side.lo
        };
        source + self.sink_score[v]
    }

    fn apply(&mut self, update: &EdgeUpdate) -> Result<()> {
        let (a, b) = (update.u, update.v);
        let mut touched = vec![a, b];
        if update.kind == UpdateKind::DeleteIntra {
            touched.extend(
                self.graph
                    .common_neighbors(a, b)
                    .filter(|&w| self.in_target(w)),
            );
        }
        update.apply(&mut self.graph)?;
        for &x in &touched {
            self.pulls[x] = if self.in_target(x) {
                pull_of(&self.graph, self.part, x)
            } else {
                light_pull(&self.graph, self.part, x)
            };
        }
        self.refresh_addition_node(a);
        self.refresh_addition_node(b);

        let mut around: Vec<NodeId> = vec![a, b];
        around.extend_from_slice(self.graph.neighbors(a));
        around.extend_from_slice(self.graph.neighbors(b));
        let mut stale: Vec<Pair> = vec![(a.min(b), a.max(b))];
        for s in around {
            if !self.in_target(s) {
                continue;
            }
            for &y in self.graph.neighbors(s) {
                if self.in_target(y) {
                    stale.push((s.min(y), s.max(y)));
                }
            }
        }
        stale.sort_unstable();
        stale.dedup();
        for pair in stale {
            self.refresh_deletion(pair);
        }
        Ok(())
    }
}

/// Pull counts without the internal-link count, for nodes outside the target.
fn light_pull(g: &Graph, p: &Partition, v: NodeId) -> Pull {
    let own = p.label(v);
    let mut hist: HashMap<CommunityId, usize> = HashMap::new();
    let mut internal = 0;
    for &w in g.neighbors(v) {
        let c = p.label(w);
        if c == own {
            internal += 1;
        } else {
            *hist.entry(c).or_insert(0) += 1;
        }
    }
    Pull {
        internal,
        external_max: hist.values().copied().max().unwrap_or(0),
        degree: g.degree(v),
        internal_links: 0,
    }
}

fn check_inputs(g: &Graph, p: &Partition, target: CommunityId) -> Result<()> {
    p.check_universe(g)?;
    p.check_community(target)?;
    if g.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok(())
}

fn to_update(kind: UpdateKind, c: Candidate, n: usize) -> EdgeUpdate {
    EdgeUpdate {
        kind,
        u: c.u,
        v: c.v,
        loss: c.value / n as f64,
    }
}

/// Best inter-community addition at a node of `target`, if any loses permanence.
pub fn best_addition(g: &Graph, p: &Partition, target: CommunityId) -> Result<Option<EdgeUpdate>> {
    check_inputs(g, p, target)?;
    let engine = Engine::new(g, p, target, Exec::Sequential);
    Ok(engine
        .best_addition()
        .filter(|c| c.value > MIN_GAIN)
        .map(|c| to_update(UpdateKind::AddInter, c, g.node_count())))
}

/// Best intra-community deletion inside `target`, if any loses permanence.
pub fn best_deletion(g: &Graph, p: &Partition, target: CommunityId) -> Result<Option<EdgeUpdate>> {
    check_inputs(g, p, target)?;
    let engine = Engine::new(g, p, target, Exec::Sequential);
    Ok(engine
        .best_deletion()
        .filter(|c| c.value > MIN_GAIN)
        .map(|c| to_update(UpdateKind::DeleteIntra, c, g.node_count())))
}

/// Rewires a copy of `g` to hide community `target` of `p` within `budget`.
pub fn deceive(
    g: &Graph,
    p: &Partition,
    target: CommunityId,
    budget: Budget,
) -> Result<(Graph, UpdatePlan)> {
    deceive_with(g, p, target, budget, Exec::default())
}

/// As [`deceive`], with the initial candidate scoring run under `exec`.
pub fn deceive_with(
    g: &Graph,
    p: &Partition,
    target: CommunityId,
    budget: Budget,
    exec: Exec,
) -> Result<(Graph, UpdatePlan)> {
    check_inputs(g, p, target)?;
    let n = g.node_count();
    let mut plan = UpdatePlan::default();
    let mut tracker = budget.tracker();
    if tracker.exhausted() {
        return Ok((g.clone(), plan));
    }
    let mut engine = Engine::new(g, p, target, exec);
    while !tracker.exhausted() {
        let add = if tracker.can_add() {
            engine.best_addition().filter(|c| c.value > MIN_GAIN)
        } else {
            None
        };
        let del = if tracker.can_delete() {
            engine.best_deletion().filter(|c| c.value > MIN_GAIN)
        } else {
            None
        };
        let chosen = match (add, del) {
            (Some(a), Some(d)) if a.value >= d.value => to_update(UpdateKind::AddInter, a, n),
            (Some(a), None) => to_update(UpdateKind::AddInter, a, n),
            (_, Some(d)) => to_update(UpdateKind::DeleteIntra, d, n),
            (None, None) => {
                plan.terminated_early = true;
                break;
            }
        };
        engine.apply(&chosen)?;
        tracker.consume(chosen.kind);
        plan.push(chosen);
    }
    Ok((engine.graph, plan))
}

/// Hides a single node by splitting it into its own community and running the
/// greedy against that community. Only additions can result.
pub fn hide_node(
    g: &Graph,
    p: &Partition,
    t: NodeId,
    budget: Budget,
) -> Result<(Graph, UpdatePlan)> {
    if !g.contains(t) {
        return Err(Error::UnknownNode(t));
    }
    p.check_universe(g)?;
    let (split, c) = p.with_singleton(t);
    deceive(g, &split, c, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permanence::exact_loss;

    fn g6() -> (Graph, Partition) {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (2, 3)]).unwrap();
        (g, Partition::from_labels([0, 0, 0, 1, 1, 1]))
    }

    #[test]
    fn zero_budget_is_identity() {
        let (g, p) = g6();
        let (h, plan) = deceive(&g, &p, 0, Budget::uniform(0)).unwrap();
        assert_eq!(h, g);
        assert!(plan.is_empty() && !plan.terminated_early);
        let (h, plan) = hide_node(&g, &p, 2, Budget::uniform(0)).unwrap();
        assert_eq!(h, g);
        assert!(plan.is_empty());
    }

    #[test]
    fn unknown_target_is_an_error() {
        let (g, p) = g6();
        assert!(matches!(
            deceive(&g, &p, 4, Budget::uniform(1)),
            Err(Error::UnknownCommunity(4))
        ));
    }

    #[test]
    fn isolated_clique_gets_a_positive_addition() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        let p = Partition::from_labels([0, 0, 0, 1, 1, 1]);
        let add = best_addition(&g, &p, 0).unwrap().unwrap();
        assert_eq!(add.kind, UpdateKind::AddInter);
        assert!(add.loss > 0.0);
        let exact = exact_loss(&g, &p, &add).unwrap().total_loss;
        assert!((exact - add.loss).abs() < 1e-12);
    }

    #[test]
    fn triangle_deletions_and_degree_one_exclusion() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let p = Partition::from_labels([0, 0, 0]);
        let del = best_deletion(&g, &p, 0).unwrap().unwrap();
        // All three deletions are symmetric; the smallest pair wins.
        assert_eq!((del.u, del.v), (0, 1));
        let path = Graph::from_edges(2, [(0, 1)]).unwrap();
        assert_eq!(
            best_deletion(&path, &Partition::from_labels([0, 0]), 0).unwrap(),
            None
        );
    }

    #[test]
    fn saturated_source_falls_back_to_other_nodes() {
        // Node 0 already touches every node of community 1.
        let g = Graph::from_edges(5, [(0, 1), (0, 3), (0, 4), (3, 4), (1, 2)]).unwrap();
        let p = Partition::from_labels([0, 0, 0, 1, 1]);
        let add = best_addition(&g, &p, 0).unwrap().unwrap();
        assert_ne!(add.u, 0);
        assert!(!g.has_edge(add.u, add.v));
    }

    #[test]
    fn hide_node_only_adds() {
        let (g, p) = g6();
        let (_, plan) = hide_node(&g, &p, 1, Budget::uniform(3)).unwrap();
        assert_eq!(plan.deletions(), 0);
        assert!(plan.additions() > 0);
    }

    #[test]
    fn split_budget_quotas_hold() {
        let (g, p) = g6();
        let (_, plan) = deceive(&g, &p, 0, Budget::split(1, 1)).unwrap();
        assert!(plan.additions() <= 1 && plan.deletions() <= 1);
        let (_, plan) = deceive(&g, &p, 0, Budget::split(0, 2)).unwrap();
        assert_eq!(plan.additions(), 0);
    }
}
