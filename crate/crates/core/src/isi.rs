//! Local and global inter-spike-interval transforms.
//!
//! For a window centred at tick `c`, a pixel's interval is `next − prev` where
//! `prev` is its latest spike at or before `c` and `next` its earliest spike
//! after `c`. The local transform (LISI) only looks inside the window. The
//! global transform (GISI) fills in a missing side from release times carried
//! across windows: the latest spike seen so far going forward, and the earliest
//! spike still ahead going backward.
//!
//! Every map is defined relative to an observed tick span. A side with no
//! spike in the span is censored and replaced by `span.start − 1` (past) or
//! `span.end + 1` (future); the interval is then clamped to the span length.
//! LISI uses the window itself as span, the combined GISI the whole sequence,
//! and the one-directional GISI maps the part of the sequence that direction
//! has seen.

use crate::error::{Error, Result};
use crate::stream::SpikeWindow;

/// Inclusive range of absolute ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TickSpan {
    pub start: u64,
    pub end: u64,
}

impl TickSpan {
    pub fn new(start: u64, end: u64) -> Self {
        assert!(start <= end, "empty tick span {start}..={end}");
        Self { start, end }
    }

    pub fn of_window(window: &SpikeWindow<'_>) -> Self {
        Self::new(window.start_tick(), window.end_tick())
    }

    pub fn len(&self) -> u64 {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, tick: u64) -> bool {
        (self.start..=self.end).contains(&tick)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

/// Per-pixel interval map with censoring flags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsiMap {
    height: usize,
    width: usize,
    intervals: Vec<u32>,
    censored_prev: Vec<bool>,
    censored_next: Vec<bool>,
    cap: u32,
}

impl IsiMap {
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Intervals in ticks, row-major, each in `1..=cap`.
    pub fn intervals(&self) -> &[u32] {
        &self.intervals
    }

    pub fn censored_prev(&self) -> &[bool] {
        &self.censored_prev
    }

    pub fn censored_next(&self) -> &[bool] {
        &self.censored_next
    }

    /// Length of the span the map was computed over.
    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn is_censored(&self, pixel: usize) -> bool {
        self.censored_prev[pixel] || self.censored_next[pixel]
    }

    pub fn is_fully_censored(&self, pixel: usize) -> bool {
        self.censored_prev[pixel] && self.censored_next[pixel]
    }

    pub fn censored_count(&self) -> usize {
        (0..self.intervals.len()).filter(|&p| self.is_censored(p)).count()
    }
}

/// Carried release times for one direction: one time map and one validity map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReleaseTimeState {
    height: usize,
    width: usize,
    time: Vec<u64>,
    valid: Vec<bool>,
}

impl ReleaseTimeState {
    /// No spike observed yet on any pixel.
    pub fn empty(height: usize, width: usize) -> Self {
        let n = height * width;
        Self {
            height,
            width,
            time: vec![0; n],
            valid: vec![false; n],
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Absolute tick of the carried spike; meaningful where `valid` is set.
    pub fn time(&self) -> &[u64] {
        &self.time
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn get(&self, pixel: usize) -> Option<u64> {
        self.valid[pixel].then_some(self.time[pixel])
    }

    /// Heap bytes held by the two maps.
    pub fn map_bytes(&self) -> usize {
        self.time.len() * std::mem::size_of::<u64>() + self.valid.len() * std::mem::size_of::<bool>()
    }

    pub fn into_maps(self) -> (Vec<u64>, Vec<bool>) {
        (self.time, self.valid)
    }

    /// Checks the positional invariant of a state about to be applied to `window`.
    fn check_against(&self, window: &SpikeWindow<'_>, direction: Direction, span: TickSpan) -> Result<()> {
        if self.height != window.height() || self.width != window.width() {
            return Err(Error::StateInconsistent(format!(
                "state is {}x{}, window is {}x{}",
                self.height,
                self.width,
                window.height(),
                window.width()
            )));
        }
        for (p, t) in (0..self.time.len()).filter_map(|p| self.get(p).map(|t| (p, t))) {
            let ok = match direction {
                Direction::Forward => t < window.start_tick() && t >= span.start,
                Direction::Backward => t > window.end_tick() && t <= span.end,
            };
            if !ok {
                return Err(Error::StateInconsistent(format!(
                    "{direction:?} release time {t} at pixel {p} not admissible for window {}..={} in span {}..={}",
                    window.start_tick(),
                    window.end_tick(),
                    span.start,
                    span.end
                )));
            }
        }
        Ok(())
    }
}

/// In-window bounding spikes around the centre, per pixel.
struct WindowBounds {
    prev: Vec<Option<u64>>,
    next: Vec<Option<u64>>,
}

fn for_each_set_bit(frame: &[u8], mut f: impl FnMut(usize)) {
    for (i, &byte) in frame.iter().enumerate() {
        let mut b = byte;
        while b != 0 {
            f(i * 8 + b.trailing_zeros() as usize);
            b &= b - 1;
        }
    }
}

fn window_bounds(window: &SpikeWindow<'_>) -> WindowBounds {
    let n = window.pixels();
    let mut prev = vec![None; n];
    let mut next = vec![None; n];
    let start = window.start_tick();
    let dt = window.delta_t();
    // ascending: the last write is the latest spike at or before the centre
    for j in 0..=dt {
        for_each_set_bit(window.frame(j), |p| prev[p] = Some(start + j as u64));
    }
    // descending: the last write is the earliest spike after the centre
    for j in (dt + 1..window.len()).rev() {
        for_each_set_bit(window.frame(j), |p| next[p] = Some(start + j as u64));
    }
    WindowBounds { prev, next }
}

/// Interval and censor flags for one pixel given its resolved bounding spikes.
#[inline]
fn resolve(prev: Option<u64>, next: Option<u64>, span: TickSpan) -> (u32, bool, bool) {
    let p = prev.map_or(span.start as i128 - 1, |t| t as i128);
    let n = next.map_or(span.end as i128 + 1, |t| t as i128);
    let interval = (n - p).min(span.len() as i128);
    debug_assert!(interval >= 1);
    (interval as u32, prev.is_none(), next.is_none())
}

fn build_map(
    height: usize,
    width: usize,
    span: TickSpan,
    mut bounds: impl FnMut(usize) -> (Option<u64>, Option<u64>),
) -> Result<IsiMap> {
    let cap = u32::try_from(span.len())
        .map_err(|_| Error::Argument(format!("span of {} ticks exceeds u32", span.len())))?;
    let n = height * width;
    let mut map = IsiMap {
        height,
        width,
        intervals: Vec::with_capacity(n),
        censored_prev: Vec::with_capacity(n),
        censored_next: Vec::with_capacity(n),
        cap,
    };
    for p in 0..n {
        let (prev, next) = bounds(p);
        let (iv, cp, cn) = resolve(prev, next, span);
        map.intervals.push(iv);
        map.censored_prev.push(cp);
        map.censored_next.push(cn);
    }
    Ok(map)
}

/// Local inter-spike interval of every pixel, capped at the window length.
pub fn lisi_transform(window: &SpikeWindow<'_>) -> IsiMap {
    let b = window_bounds(window);
    build_map(window.height(), window.width(), TickSpan::of_window(window), |p| {
        (b.prev[p], b.next[p])
    })
    .expect("window length fits in u32")
}

/// Completes censored sides of `lisi` with carried release times.
///
/// `fwd` holds, per pixel, the latest spike before the window; `bwd` the
/// earliest spike after it. Pass [`ReleaseTimeState::empty`] for a direction
/// that should not contribute. `span` is the tick range the result is defined
/// over and must contain the window and every valid carried time.
pub fn gisi_update(
    lisi: &IsiMap,
    window: &SpikeWindow<'_>,
    fwd: &ReleaseTimeState,
    bwd: &ReleaseTimeState,
    span: TickSpan,
) -> Result<IsiMap> {
    let wspan = TickSpan::of_window(window);
    if lisi.height != window.height() || lisi.width != window.width() || lisi.cap as u64 != wspan.len() {
        return Err(Error::StateInconsistent(
            "local interval map does not belong to this window".into(),
        ));
    }
    if !(span.start <= wspan.start && wspan.end <= span.end) {
        return Err(Error::StateInconsistent(format!(
            "span {}..={} does not contain window {}..={}",
            span.start, span.end, wspan.start, wspan.end
        )));
    }
    fwd.check_against(window, Direction::Forward, span)?;
    bwd.check_against(window, Direction::Backward, span)?;

    let needs_bounds = (0..lisi.intervals.len()).any(|p| lisi.is_censored(p));
    let bounds = needs_bounds.then(|| window_bounds(window));
    let mut out = build_map(window.height(), window.width(), span, |p| {
        let Some(b) = &bounds else {
            return (None, None);
        };
        let prev = b.prev[p].or_else(|| fwd.get(p));
        let next = b.next[p].or_else(|| bwd.get(p));
        (prev, next)
    })?;
    // Uncensored local intervals are already global.
    for p in 0..out.intervals.len() {
        if !lisi.is_censored(p) {
            out.intervals[p] = lisi.intervals[p];
            out.censored_prev[p] = false;
            out.censored_next[p] = false;
        }
    }
    Ok(out)
}

/// Advances a carried release-time state past `window`.
///
/// Forward keeps the latest in-window spike, backward the earliest; pixels
/// without a spike in the window keep their previous state.
pub fn release_state_update(
    window: &SpikeWindow<'_>,
    state: &ReleaseTimeState,
    direction: Direction,
) -> ReleaseTimeState {
    assert_eq!(
        (state.height, state.width),
        (window.height(), window.width()),
        "state and window dims differ"
    );
    let mut next = state.clone();
    let start = window.start_tick();
    let mut mark = |j: usize| {
        let t = start + j as u64;
        for_each_set_bit(window.frame(j), |p| {
            next.time[p] = t;
            next.valid[p] = true;
        });
    };
    match direction {
        Direction::Forward => (0..window.len()).for_each(&mut mark),
        Direction::Backward => (0..window.len()).rev().for_each(&mut mark),
    }
    next
}

/// Per-window maps produced by [`gisi_sweep`].
#[derive(Debug, Clone)]
pub struct GisiSweep {
    pub lisi: Vec<IsiMap>,
    /// Past side completed from earlier windows only.
    pub forward: Vec<IsiMap>,
    /// Future side completed from later windows only.
    pub backward: Vec<IsiMap>,
    /// Both sides completed.
    pub combined: Vec<IsiMap>,
    /// Forward state after the last window.
    pub forward_state: ReleaseTimeState,
    /// Backward state after the first window.
    pub backward_state: ReleaseTimeState,
}

impl GisiSweep {
    pub fn len(&self) -> usize {
        self.lisi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lisi.is_empty()
    }

    pub fn maps(&self, mode: IsiMode) -> &[IsiMap] {
        match mode {
            IsiMode::Lisi => &self.lisi,
            IsiMode::GisiForward => &self.forward,
            IsiMode::GisiBackward => &self.backward,
            IsiMode::GisiCombined => &self.combined,
        }
    }
}

/// Which interval map to export.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IsiMode {
    Lisi,
    GisiForward,
    GisiBackward,
    GisiCombined,
}

impl IsiMode {
    pub const ALL: [IsiMode; 4] = [
        IsiMode::Lisi,
        IsiMode::GisiForward,
        IsiMode::GisiBackward,
        IsiMode::GisiCombined,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IsiMode::Lisi => "lisi",
            IsiMode::GisiForward => "gisi-forward",
            IsiMode::GisiBackward => "gisi-backward",
            IsiMode::GisiCombined => "gisi-combined",
        }
    }
}

impl std::str::FromStr for IsiMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IsiMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown transform mode {s:?}")))
    }
}

/// Runs the backward then the forward release-time recurrence over contiguous
/// windows, producing LISI and the three GISI variants for every window.
pub fn gisi_sweep(windows: &[SpikeWindow<'_>]) -> Result<GisiSweep> {
    let first = windows
        .first()
        .ok_or_else(|| Error::Argument("gisi sweep needs at least one window".into()))?;
    let (h, w) = (first.height(), first.width());
    for (i, pair) in windows.windows(2).enumerate() {
        let (a, b) = (&pair[0], &pair[1]);
        if (b.height(), b.width()) != (h, w) {
            return Err(Error::Argument(format!("window {} has different dims", i + 1)));
        }
        if b.start_tick() != a.end_tick() + 1 {
            return Err(Error::Argument(format!(
                "windows {i} and {} are not contiguous: {}..={} then {}..={}",
                i + 1,
                a.start_tick(),
                a.end_tick(),
                b.start_tick(),
                b.end_tick()
            )));
        }
    }
    let last = windows.last().expect("non-empty");
    let global = TickSpan::new(first.start_tick(), last.end_tick());
    let k = windows.len();

    let mut bwd_before = Vec::with_capacity(k);
    let mut bwd = ReleaseTimeState::empty(h, w);
    for win in windows.iter().rev() {
        bwd_before.push(bwd.clone());
        bwd = release_state_update(win, &bwd, Direction::Backward);
    }
    bwd_before.reverse();

    let none = ReleaseTimeState::empty(h, w);
    let mut fwd = ReleaseTimeState::empty(h, w);
    let mut out = GisiSweep {
        lisi: Vec::with_capacity(k),
        forward: Vec::with_capacity(k),
        backward: Vec::with_capacity(k),
        combined: Vec::with_capacity(k),
        forward_state: none.clone(),
        backward_state: bwd,
    };
    for (win, bwd_i) in windows.iter().zip(&bwd_before) {
        let lisi = lisi_transform(win);
        let past = TickSpan::new(global.start, win.end_tick());
        let future = TickSpan::new(win.start_tick(), global.end);
        out.forward.push(gisi_update(&lisi, win, &fwd, &none, past)?);
        out.backward.push(gisi_update(&lisi, win, &none, bwd_i, future)?);
        out.combined.push(gisi_update(&lisi, win, &fwd, bwd_i, global)?);
        out.lisi.push(lisi);
        fwd = release_state_update(win, &fwd, Direction::Forward);
    }
    out.forward_state = fwd;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::{slice_window, SpikeStream};

    fn one_pixel(len: usize, spikes: &[usize]) -> SpikeStream {
        SpikeStream::from_fn(1, 1, len, 0, |n, _, _| spikes.contains(&n)).unwrap()
    }

    #[test]
    fn all_ones_window_has_unit_intervals() {
        let s = SpikeStream::from_fn(3, 3, 41, 0, |_, _, _| true).unwrap();
        let w = slice_window(&s, 20, 20).unwrap();
        let m = lisi_transform(&w);
        assert!(m.intervals().iter().all(|&i| i == 1));
        assert_eq!(m.censored_count(), 0);
    }

    #[test]
    fn lisi_picks_bounding_spikes_around_centre() {
        let s = one_pixel(41, &[3, 10, 30]);
        let m = lisi_transform(&slice_window(&s, 20, 20).unwrap());
        assert_eq!(m.intervals(), &[20]);
        assert!(!m.is_censored(0));
    }

    #[test]
    fn spike_at_centre_counts_as_prev() {
        let s = one_pixel(41, &[20, 25]);
        let m = lisi_transform(&slice_window(&s, 20, 20).unwrap());
        assert_eq!(m.intervals(), &[5]);
    }

    #[test]
    fn missing_next_is_substituted_by_window_end() {
        let s = one_pixel(41, &[3]);
        let m = lisi_transform(&slice_window(&s, 20, 20).unwrap());
        assert!(m.censored_next()[0] && !m.censored_prev()[0]);
        // next := end + 1 = 41
        assert_eq!(m.intervals(), &[38]);
        assert!(m.intervals()[0] <= m.cap());
    }

    #[test]
    fn silent_pixel_is_capped() {
        let s = one_pixel(41, &[]);
        let m = lisi_transform(&slice_window(&s, 20, 20).unwrap());
        assert!(m.is_fully_censored(0));
        assert_eq!(m.intervals(), &[41]);
    }

    #[test]
    fn gisi_bridges_an_empty_window() {
        let s = one_pixel(123, &[5, 100]);
        let ws = s.windows(3, 41).unwrap();
        assert_eq!(ws[1].center_tick(), 61);
        let sweep = gisi_sweep(&ws).unwrap();
        assert_eq!(sweep.lisi[1].intervals(), &[41]);
        assert!(sweep.lisi[1].is_fully_censored(0));
        assert_eq!(sweep.combined[1].intervals(), &[95]);
        assert!(!sweep.combined[1].is_censored(0));
        // forward-only sees 5 but not 100: next := window end + 1 = 82
        assert_eq!(sweep.forward[1].intervals(), &[77]);
        assert!(sweep.forward[1].censored_next()[0]);
        // backward-only sees 100 but not 5: prev := window start - 1 = 40
        assert_eq!(sweep.backward[1].intervals(), &[60]);
        assert!(sweep.backward[1].censored_prev()[0]);
    }

    #[test]
    fn never_spiking_pixel_hits_global_cap() {
        let s = one_pixel(5 * 41, &[]);
        let sweep = gisi_sweep(&s.windows(5, 41).unwrap()).unwrap();
        for m in &sweep.combined {
            assert!(m.is_fully_censored(0));
            assert_eq!(m.intervals(), &[205]);
            assert_eq!(m.cap(), 205);
        }
    }

    #[test]
    fn single_window_sweep_equals_lisi() {
        let s = SpikeStream::from_fn(4, 4, 41, 0, |n, y, x| (n * 7 + y * 3 + x) % 11 == 0).unwrap();
        let sweep = gisi_sweep(&s.windows(1, 41).unwrap()).unwrap();
        assert_eq!(sweep.combined[0], sweep.lisi[0]);
        assert_eq!(sweep.forward[0], sweep.lisi[0]);
        assert_eq!(sweep.backward[0], sweep.lisi[0]);
    }

    #[test]
    fn release_state_updates() {
        let s = SpikeStream::zeros(2, 2, 41, 0).unwrap();
        let w = slice_window(&s, 20, 20).unwrap();
        let mut st = ReleaseTimeState::empty(2, 2);
        st.time[1] = 3;
        st.valid[1] = true;
        assert_eq!(release_state_update(&w, &st, Direction::Forward), st);

        let ones = SpikeStream::from_fn(2, 2, 82, 0, |n, _, _| n >= 41).unwrap();
        let w = slice_window(&ones, 61, 20).unwrap();
        let f = release_state_update(&w, &ReleaseTimeState::empty(2, 2), Direction::Forward);
        assert!(f.time().iter().all(|&t| t == 81));
        let b = release_state_update(&w, &ReleaseTimeState::empty(2, 2), Direction::Backward);
        assert!(b.time().iter().all(|&t| t == 41));
        assert!(b.valid().iter().all(|&v| v));
    }

    #[test]
    fn inconsistent_state_is_rejected() {
        let s = one_pixel(82, &[50]);
        let ws = s.windows(2, 41).unwrap();
        let lisi = lisi_transform(&ws[0]);
        // forward state pointing into the future of window 0
        let bad = release_state_update(&ws[1], &ReleaseTimeState::empty(1, 1), Direction::Forward);
        let span = TickSpan::new(0, 81);
        let err = gisi_update(&lisi, &ws[0], &bad, &ReleaseTimeState::empty(1, 1), span).unwrap_err();
        assert!(matches!(err, Error::StateInconsistent(_)));
        // correct use as backward state is fine
        assert!(gisi_update(&lisi, &ws[0], &ReleaseTimeState::empty(1, 1), &bad, span).is_ok());
    }

    #[test]
    fn non_contiguous_windows_rejected() {
        let s = one_pixel(200, &[]);
        let a = slice_window(&s, 20, 20).unwrap();
        let b = slice_window(&s, 62, 20).unwrap();
        assert!(matches!(gisi_sweep(&[a, b]), Err(Error::Argument(_))));
        assert!(matches!(gisi_sweep(&[]), Err(Error::Argument(_))));
    }

    #[test]
    fn carried_state_is_two_maps() {
        let st = ReleaseTimeState::empty(250, 400);
        // Exhaustive destructuring: adding a field to the state breaks this test.
        let ReleaseTimeState {
            height,
            width,
            time,
            valid,
        } = st.clone();
        assert_eq!((height, width), (250, 400));
        assert_eq!(time.len(), 250 * 400);
        assert_eq!(valid.len(), 250 * 400);
        assert_eq!(st.map_bytes(), 250 * 400 * 9);
    }

    #[test]
    fn mode_names_parse() {
        for m in IsiMode::ALL {
            assert_eq!(m.name().parse::<IsiMode>().unwrap(), m);
        }
        assert!("gisi".parse::<IsiMode>().is_err());
    }
}
