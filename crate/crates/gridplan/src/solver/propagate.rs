//! Propagators: boolean routing sums (the path constraints), conditional
//! precedences between consecutive path links, and timetable reasoning over
//! the unary link resources, shared-link groups and storage reservoirs.

use crate::model::Time;

use super::{Model, StorageDef};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Conflict;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RDom {
    Zero,
    One,
    Both,
}

/// Search state: routing domains plus start-time bounds, one slot per
/// routing variable. Cloned at every branch point.
#[derive(Debug, Clone)]
pub(crate) struct State {
    pub rd: Vec<RDom>,
    pub lo: Vec<Time>,
    pub hi: Vec<Time>,
}

impl State {
    pub fn root(model: &Model) -> State {
        let n = model.vars.len();
        let mut st = State {
            rd: vec![RDom::Both; n],
            lo: vec![0; n],
            hi: model
                .vars
                .iter()
                .map(|v| (model.horizon - v.dur).max(0))
                .collect(),
        };
        for &v in &model.root_zero {
            st.rd[v] = RDom::Zero;
        }
        st
    }

    fn fix(&mut self, v: usize, value: bool) -> Result<bool, Conflict> {
        match (self.rd[v], value) {
            (RDom::Both, true) => {
                self.rd[v] = RDom::One;
                Ok(true)
            }
            (RDom::Both, false) => {
                self.rd[v] = RDom::Zero;
                Ok(true)
            }
            (RDom::One, false) | (RDom::Zero, true) => Err(Conflict),
            _ => Ok(false),
        }
    }

    /// Start domain emptied: an assigned transfer conflicts, an optional one
    /// is ruled out.
    fn drop_or_conflict(&mut self, v: usize) -> Result<bool, Conflict> {
        match self.rd[v] {
            RDom::One => Err(Conflict),
            RDom::Both => {
                self.rd[v] = RDom::Zero;
                Ok(true)
            }
            RDom::Zero => Ok(false),
        }
    }
}

pub(crate) fn propagate(model: &Model, st: &mut State, ub: Time) -> Result<(), Conflict> {
    loop {
        let mut changed = false;
        changed |= prop_bound(model, st, ub)?;
        for d in 0..model.demand_count() {
            changed |= prop_path(model, st, d)?;
        }
        for node in &model.chain_nodes {
            changed |= prop_chain(model, st, &node.in_vars, &node.out_vars)?;
        }
        for e in 0..model.network.links.len() {
            changed |= prop_link(model, st, e, ub)?;
        }
        for g in &model.groups {
            changed |= prop_group(model, st, g)?;
        }
        for s in &model.storage_sites {
            prop_storage(model, st, s)?;
        }
        for &(d1, d2) in &model.sym_pairs {
            changed |= prop_symmetry(model, st, d1, d2)?;
        }
        if !changed {
            return Ok(());
        }
    }
}

/// Branch-and-bound bound: every scheduled transfer must end by `ub`.
fn prop_bound(model: &Model, st: &mut State, ub: Time) -> Result<bool, Conflict> {
    let mut changed = false;
    for v in 0..model.vars.len() {
        if st.rd[v] == RDom::Zero {
            continue;
        }
        let latest = ub - model.vars[v].dur;
        if st.hi[v] > latest {
            st.hi[v] = latest;
            changed = true;
        }
        if st.lo[v] > st.hi[v] {
            changed |= st.drop_or_conflict(v)?;
        }
    }
    Ok(changed)
}

fn count(st: &State, vars: &[usize]) -> (usize, usize) {
    let mut ones = 0;
    let mut maybe = 0;
    for &v in vars {
        match st.rd[v] {
            RDom::One => ones += 1,
            RDom::Both => maybe += 1,
            RDom::Zero => {}
        }
    }
    (ones, maybe)
}

fn sum_exact(st: &mut State, vars: &[usize], k: usize) -> Result<bool, Conflict> {
    let (ones, maybe) = count(st, vars);
    if ones > k || ones + maybe < k {
        return Err(Conflict);
    }
    let mut changed = false;
    if ones == k && maybe > 0 {
        for &v in vars {
            if st.rd[v] == RDom::Both {
                changed |= st.fix(v, false)?;
            }
        }
    } else if ones + maybe == k && maybe > 0 {
        for &v in vars {
            if st.rd[v] == RDom::Both {
                changed |= st.fix(v, true)?;
            }
        }
    }
    Ok(changed)
}

fn sum_le_one(st: &mut State, vars: &[usize]) -> Result<bool, Conflict> {
    let (ones, _) = count(st, vars);
    if ones > 1 {
        return Err(Conflict);
    }
    let mut changed = false;
    if ones == 1 {
        for &v in vars {
            if st.rd[v] == RDom::Both {
                changed |= st.fix(v, false)?;
            }
        }
    }
    Ok(changed)
}

fn sum_balance(st: &mut State, ins: &[usize], outs: &[usize]) -> Result<bool, Conflict> {
    let (in_lo, in_maybe) = count(st, ins);
    let (out_lo, out_maybe) = count(st, outs);
    let in_hi = in_lo + in_maybe;
    let out_hi = out_lo + out_maybe;
    if in_lo > out_hi || out_lo > in_hi {
        return Err(Conflict);
    }
    let mut changed = false;
    if in_lo == out_hi {
        // the common sum is pinned: ins at their minimum, outs at their maximum
        for &v in ins {
            if st.rd[v] == RDom::Both {
                changed |= st.fix(v, false)?;
            }
        }
        for &v in outs {
            if st.rd[v] == RDom::Both {
                changed |= st.fix(v, true)?;
            }
        }
    }
    if out_lo == in_hi {
        for &v in outs {
            if st.rd[v] == RDom::Both {
                changed |= st.fix(v, false)?;
            }
        }
        for &v in ins {
            if st.rd[v] == RDom::Both {
                changed |= st.fix(v, true)?;
            }
        }
    }
    Ok(changed)
}

fn prop_path(model: &Model, st: &mut State, d: usize) -> Result<bool, Conflict> {
    let mut changed = false;
    let sums = &model.path_sums[d];
    for set in &sums.exact_one {
        changed |= sum_exact(st, set, 1)?;
    }
    for (ins, outs) in &sums.balanced {
        changed |= sum_le_one(st, ins)?;
        changed |= sum_le_one(st, outs)?;
        changed |= sum_balance(st, ins, outs)?;
    }
    Ok(changed)
}

/// Conditional precedence at a transit node: if a demand arrives over `i`
/// and leaves over `o`, the outgoing transfer starts no earlier than the
/// incoming one ends.
fn prop_chain(
    model: &Model,
    st: &mut State,
    ins: &[usize],
    outs: &[usize],
) -> Result<bool, Conflict> {
    let mut changed = false;
    for &i in ins {
        if st.rd[i] == RDom::Zero {
            continue;
        }
        let dur_in = model.vars[i].dur;
        for &o in outs {
            if st.rd[o] == RDom::Zero {
                continue;
            }
            match (st.rd[i], st.rd[o]) {
                (RDom::One, RDom::One) => {
                    let min_out = st.lo[i] + dur_in;
                    if st.lo[o] < min_out {
                        st.lo[o] = min_out;
                        changed = true;
                        if st.lo[o] > st.hi[o] {
                            return Err(Conflict);
                        }
                    }
                    let max_in = st.hi[o] - dur_in;
                    if st.hi[i] > max_in {
                        st.hi[i] = max_in;
                        changed = true;
                        if st.lo[i] > st.hi[i] {
                            return Err(Conflict);
                        }
                    }
                }
                (RDom::One, RDom::Both) => {
                    if st.lo[i] + dur_in > st.hi[o] {
                        changed |= st.fix(o, false)?;
                    }
                }
                (RDom::Both, RDom::One) => {
                    if st.lo[i] + dur_in > st.hi[o] {
                        changed |= st.fix(i, false)?;
                    }
                }
                _ => {}
            }
        }
    }
    Ok(changed)
}

/// Disjoint forbidden intervals, sorted by start. Raises `lo` past every
/// interval the task would necessarily overlap when started there.
fn tighten_bounds(lo: &mut Time, hi: &mut Time, dur: Time, forbidden: &[(Time, Time)]) -> bool {
    let mut changed = false;
    for &(s, e) in forbidden {
        if s < *lo + dur && e > *lo {
            *lo = e;
            changed = true;
        }
    }
    for &(s, e) in forbidden.iter().rev() {
        if s < *hi + dur && e > *hi {
            *hi = s - dur;
            changed = true;
        }
    }
    changed
}

/// Profile of (start, end, height) parts as disjoint constant segments.
fn profile(parts: &[(Time, Time, Time)]) -> Vec<(Time, Time, Time)> {
    let mut events: Vec<(Time, Time)> = Vec::with_capacity(parts.len() * 2);
    for &(s, e, h) in parts {
        if s < e {
            events.push((s, h));
            events.push((e, -h));
        }
    }
    events.sort_unstable();
    let mut segs = Vec::new();
    let mut height = 0;
    let mut i = 0;
    let mut last_t = 0;
    while i < events.len() {
        let t = events[i].0;
        if height > 0 && last_t < t {
            segs.push((last_t, t, height));
        }
        while i < events.len() && events[i].0 == t {
            height += events[i].1;
            i += 1;
        }
        last_t = t;
    }
    segs
}

/// Compulsory part of an assigned transfer, if any.
fn compulsory(st: &State, v: usize, dur: Time) -> Option<(Time, Time)> {
    if st.rd[v] == RDom::One && st.hi[v] < st.lo[v] + dur {
        Some((st.hi[v], st.lo[v] + dur))
    } else {
        None
    }
}

/// Timetable propagation of one cumulative resource. `tasks` pairs routing
/// variables with their consumption; fakes are fixed parts.
fn prop_cumulative(
    model: &Model,
    st: &mut State,
    tasks: &[(usize, Time)],
    fakes: &[(Time, Time, Time)],
    capacity: Time,
) -> Result<bool, Conflict> {
    let mut parts: Vec<(usize, (Time, Time, Time))> = Vec::new(); // keyed by task position
    for (idx, &(v, cons)) in tasks.iter().enumerate() {
        if let Some((s, e)) = compulsory(st, v, model.vars[v].dur) {
            parts.push((idx, (s, e, cons)));
        }
    }
    let all: Vec<(Time, Time, Time)> = parts
        .iter()
        .map(|&(_, p)| p)
        .chain(fakes.iter().copied())
        .collect();
    if profile(&all).iter().any(|&(_, _, h)| h > capacity) {
        return Err(Conflict);
    }

    let mut changed = false;
    for (idx, &(v, cons)) in tasks.iter().enumerate() {
        if st.rd[v] == RDom::Zero {
            continue;
        }
        let others: Vec<(Time, Time, Time)> = parts
            .iter()
            .filter(|&&(i, _)| i != idx)
            .map(|&(_, p)| p)
            .chain(fakes.iter().copied())
            .collect();
        if others.is_empty() {
            if cons > capacity {
                changed |= st.drop_or_conflict(v)?;
            }
            continue;
        }
        let forbidden: Vec<(Time, Time)> = profile(&others)
            .into_iter()
            .filter(|&(_, _, h)| h + cons > capacity)
            .map(|(s, e, _)| (s, e))
            .collect();
        if cons > capacity {
            changed |= st.drop_or_conflict(v)?;
            continue;
        }
        let (mut lo, mut hi) = (st.lo[v], st.hi[v]);
        while tighten_bounds(&mut lo, &mut hi, model.vars[v].dur, &forbidden) {}
        if lo != st.lo[v] || hi != st.hi[v] {
            st.lo[v] = lo;
            st.hi[v] = hi;
            changed = true;
            if lo > hi {
                changed |= st.drop_or_conflict(v)?;
            }
        }
    }
    Ok(changed)
}

/// Unary link resource plus an energy bound: transfers assigned to the link
/// run serially, so they cannot all finish by `ub` if their total duration
/// pushes past it.
fn prop_link(model: &Model, st: &mut State, e: usize, ub: Time) -> Result<bool, Conflict> {
    let vars = &model.link_vars[e];
    let mut min_lo = Time::MAX;
    let mut total = 0;
    for &v in vars {
        if st.rd[v] == RDom::One {
            min_lo = min_lo.min(st.lo[v]);
            total += model.vars[v].dur;
        }
    }
    if total > 0 && min_lo + total > ub {
        return Err(Conflict);
    }
    let tasks: Vec<(usize, Time)> = vars.iter().map(|&v| (v, 1)).collect();
    prop_cumulative(model, st, &tasks, &model.fake_link_parts(e), 1)
}

fn prop_group(model: &Model, st: &mut State, g: &super::GroupDef) -> Result<bool, Conflict> {
    let mut tasks = Vec::new();
    let mut fakes = Vec::new();
    for (mi, &e) in g.members.iter().enumerate() {
        let cons = g.consumption[mi];
        for &v in &model.link_vars[e] {
            tasks.push((v, cons));
        }
        for &(s, end) in &model.fake_link[e] {
            fakes.push((s, end, cons));
        }
    }
    prop_cumulative(model, st, &tasks, &fakes, g.capacity)
}

/// Storage reservoir check: for every demand routed through the site, space
/// equal to the file size is held from the start of the incoming transfer to
/// the end of the outgoing one. Compulsory occupations must fit.
fn prop_storage(model: &Model, st: &mut State, sdef: &StorageDef) -> Result<(), Conflict> {
    let mut parts: Vec<(Time, Time, Time)> = model.fake_storage[sdef.site].clone();
    for &(in_var, out_var, cons) in &sdef.pairs {
        if st.rd[in_var] == RDom::One && st.rd[out_var] == RDom::One {
            let s = st.hi[in_var];
            let e = st.lo[out_var] + model.vars[out_var].dur;
            if s < e {
                parts.push((s, e, cons));
            }
        }
    }
    if profile(&parts).iter().any(|&(_, _, h)| h > sdef.capacity) {
        return Err(Conflict);
    }
    Ok(())
}

/// Lexicographic ordering for interchangeable demands: d1's chosen link
/// index is at most d2's, and on the same link d1 starts no later.
fn prop_symmetry(model: &Model, st: &mut State, d1: usize, d2: usize) -> Result<bool, Conflict> {
    let candidates = |st: &State, d: usize| -> Vec<usize> {
        model.demand_vars[d]
            .iter()
            .copied()
            .filter(|&v| st.rd[v] != RDom::Zero)
            .collect()
    };
    let c1 = candidates(st, d1);
    let c2 = candidates(st, d2);
    let (Some(&first1), Some(&last2)) = (c1.first(), c2.last()) else {
        // an empty candidate set conflicts in the path sums
        return Ok(false);
    };
    let min1 = model.vars[first1].link;
    let max2 = model.vars[last2].link;
    if min1 > max2 {
        return Err(Conflict);
    }
    let mut changed = false;
    for &v in &c2 {
        if model.vars[v].link < min1 {
            changed |= st.fix(v, false)?;
        }
    }
    for &v in &c1 {
        if model.vars[v].link > max2 {
            changed |= st.fix(v, false)?;
        }
    }

    let assigned = |st: &State, cands: &[usize]| -> Option<usize> {
        match cands {
            [v] if st.rd[*v] == RDom::One => Some(*v),
            _ => None,
        }
    };
    if let (Some(v1), Some(v2)) = (assigned(st, &candidates(st, d1)), assigned(st, &candidates(st, d2)))
    {
        if model.vars[v1].link == model.vars[v2].link {
            // start(d1) <= start(d2)
            if st.lo[v2] < st.lo[v1] {
                st.lo[v2] = st.lo[v1];
                changed = true;
                if st.lo[v2] > st.hi[v2] {
                    return Err(Conflict);
                }
            }
            if st.hi[v1] > st.hi[v2] {
                st.hi[v1] = st.hi[v2];
                changed = true;
                if st.lo[v1] > st.hi[v1] {
                    return Err(Conflict);
                }
            }
        }
    }
    Ok(changed)
}

impl Model {
    fn fake_link_parts(&self, e: usize) -> Vec<(Time, Time, Time)> {
        self.fake_link[e].iter().map(|&(s, end)| (s, end, 1)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_sums_overlaps() {
        let segs = profile(&[(0, 4, 1), (2, 6, 2)]);
        assert_eq!(segs, vec![(0, 2, 1), (2, 4, 3), (4, 6, 2)]);
    }

    #[test]
    fn tighten_skips_forbidden_region() {
        let (mut lo, mut hi) = (2, 10);
        // task of duration 2 may not overlap [0,4)
        tighten_bounds(&mut lo, &mut hi, 2, &[(0, 4)]);
        assert_eq!(lo, 4);
        assert_eq!(hi, 10);
    }

    #[test]
    fn tighten_matches_exhaustive_feasibility() {
        // oracle: smallest / largest start in [lo, hi] whose interval avoids
        // all forbidden parts
        let forbidden = [(3, 5), (8, 9)];
        for dur in 1..4 {
            let feasible: Vec<Time> = (0..15)
                .filter(|&s| forbidden.iter().all(|&(fs, fe)| s + dur <= fs || s >= fe))
                .collect();
            let (mut lo, mut hi) = (0, 12);
            while tighten_bounds(&mut lo, &mut hi, dur, &forbidden) {}
            let want_lo = *feasible.iter().find(|&&s| s >= 0).unwrap();
            let want_hi = *feasible.iter().rev().find(|&&s| s <= 12).unwrap();
            assert_eq!(lo, want_lo, "dur={dur}");
            assert_eq!(hi, want_hi, "dur={dur}");
        }
    }
}
