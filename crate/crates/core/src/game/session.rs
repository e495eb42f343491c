use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::field::RewardField;
use crate::error::{Error, Result};
use crate::stroke::{Drawing, Point, Stroke};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Open,
    Accepted,
    Rejected,
}

/// Full scoring event, kept server-side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GameEvent {
    Collect { index: usize, value: f64 },
    Penalty { index: usize, penalty: f64 },
}

/// What a client may learn about an event: its kind and signed value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventFlash {
    pub kind: FlashKind,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlashKind {
    Reward,
    Penalty,
}

impl GameEvent {
    pub fn flash(&self) -> EventFlash {
        match *self {
            GameEvent::Collect { value, .. } => EventFlash {
                kind: FlashKind::Reward,
                delta: value,
            },
            GameEvent::Penalty { penalty, .. } => EventFlash {
                kind: FlashKind::Penalty,
                delta: -penalty,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentOutcome {
    pub delta: f64,
    pub events: Vec<GameEvent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: SessionStatus,
    pub score_fraction: f64,
}

/// Client-facing snapshot: no reward or penalty coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub image_id: String,
    pub width: u32,
    pub height: u32,
    pub status: SessionStatus,
    pub score: f64,
    pub collected: usize,
    pub triggered: usize,
    pub reward_count: usize,
    pub recent_events: Vec<EventFlash>,
}

const RECENT_EVENTS: usize = 16;

#[derive(Debug, Clone)]
pub struct GameSession {
    session_id: String,
    field: RewardField,
    collected: Vec<bool>,
    triggered: Vec<bool>,
    score: f64,
    strokes: Vec<Vec<Point>>,
    current: Vec<Point>,
    status: SessionStatus,
    recent: VecDeque<EventFlash>,
}

fn segment_distance(p: Point, a: Point, b: Point) -> (f64, f64) {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len_sq = dx * dx + dy * dy;
    let t = if len_sq == 0.0 {
        0.0
    } else {
        (((p.x - a.x) * dx + (p.y - a.y) * dy) / len_sq).clamp(0.0, 1.0)
    };
    let q = Point::new(a.x + t * dx, a.y + t * dy);
    (p.distance(&q), t)
}

impl GameSession {
    pub fn new(session_id: impl Into<String>, field: RewardField) -> Self {
        Self {
            session_id: session_id.into(),
            collected: vec![false; field.reward_points.len()],
            triggered: vec![false; field.penalty_points.len()],
            field,
            score: 0.0,
            strokes: Vec::new(),
            current: Vec::new(),
            status: SessionStatus::Open,
            recent: VecDeque::new(),
        }
    }

    pub fn session_id(&self) -> &str {
        &self.session_id
    }

    pub fn image_id(&self) -> &str {
        &self.field.image_id
    }

    pub fn field(&self) -> &RewardField {
        &self.field
    }

    pub fn score(&self) -> f64 {
        self.score
    }

    pub fn status(&self) -> SessionStatus {
        self.status
    }

    pub fn collected(&self) -> impl Iterator<Item = usize> + '_ {
        self.collected.iter().enumerate().filter(|(_, &c)| c).map(|(i, _)| i)
    }

    pub fn triggered(&self) -> impl Iterator<Item = usize> + '_ {
        self.triggered.iter().enumerate().filter(|(_, &c)| c).map(|(i, _)| i)
    }

    fn ensure_open(&self) -> Result<()> {
        match self.status {
            SessionStatus::Open => Ok(()),
            _ => Err(Error::SessionClosed),
        }
    }

    /// Extends the current stroke with `points` and fires every unfired
    /// point near the new path. The path starts at the last point already
    /// drawn in this stroke, so splitting a stroke into several calls gives
    /// the same score.
    pub fn score_segment(&mut self, points: &[Point]) -> Result<SegmentOutcome> {
        self.ensure_open()?;
        if points.is_empty() {
            return Err(Error::Empty("point list"));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite point ({}, {})", p.x, p.y)));
        }
        let mut path: Vec<Point> = Vec::with_capacity(points.len() + 1);
        path.extend(self.current.last().copied());
        path.extend_from_slice(points);

        let mut events = Vec::new();
        if path.len() == 1 {
            self.fire_near(path[0], path[0], &mut events);
        }
        for w in path.windows(2) {
            self.fire_near(w[0], w[1], &mut events);
        }
        self.current.extend_from_slice(points);

        let delta = events.iter().map(|e| e.flash().delta).sum();
        self.score += delta;
        for e in &events {
            if self.recent.len() == RECENT_EVENTS {
                self.recent.pop_front();
            }
            self.recent.push_back(e.flash());
        }
        Ok(SegmentOutcome { delta, events })
    }

    /// Fires points within their radius of segment a-b, in drawing order.
    fn fire_near(&mut self, a: Point, b: Point, events: &mut Vec<GameEvent>) {
        let mut hits: Vec<(f64, GameEvent)> = Vec::new();
        let r = self.field.params.collect_radius;
        for (i, rp) in self.field.reward_points.iter().enumerate() {
            if self.collected[i] {
                continue;
            }
            let (d, t) = segment_distance(rp.point, a, b);
            if d <= r {
                self.collected[i] = true;
                hits.push((t, GameEvent::Collect { index: i, value: rp.value }));
            }
        }
        let r_p = self.field.params.penalty_radius;
        for (i, pp) in self.field.penalty_points.iter().enumerate() {
            if self.triggered[i] {
                continue;
            }
            let (d, t) = segment_distance(pp.point, a, b);
            if d <= r_p {
                self.triggered[i] = true;
                hits.push((t, GameEvent::Penalty { index: i, penalty: pp.penalty }));
            }
        }
        hits.sort_by(|x, y| x.0.total_cmp(&y.0));
        events.extend(hits.into_iter().map(|(_, e)| e));
    }

    /// Closes the current stroke; the next segment starts a new one.
    pub fn end_stroke(&mut self) -> Result<()> {
        self.ensure_open()?;
        if !self.current.is_empty() {
            self.strokes.push(std::mem::take(&mut self.current));
        }
        Ok(())
    }

    pub fn finalize(&mut self, cutoff: f64) -> Result<Verdict> {
        self.ensure_open()?;
        if !(cutoff > 0.0 && cutoff <= 1.0) {
            return Err(Error::InvalidArgument(format!("cutoff must be in (0, 1], got {cutoff}")));
        }
        self.end_stroke()?;
        let score_fraction = (self.score.max(0.0) / self.field.total_reward).min(1.0);
        self.status = if score_fraction >= cutoff {
            SessionStatus::Accepted
        } else {
            SessionStatus::Rejected
        };
        Ok(Verdict {
            status: self.status,
            score_fraction,
        })
    }

    /// Everything drawn so far. Strokes that never left their first point
    /// are dropped.
    pub fn drawing(&self, annotator_id: Option<String>) -> Result<Drawing> {
        let strokes = self
            .strokes
            .iter()
            .chain(std::iter::once(&self.current))
            .filter_map(|pts| Stroke::new(0, pts.clone()).ok())
            .enumerate()
            .map(|(i, s)| s.with_order_index(i as u32))
            .collect();
        Drawing::new(
            self.field.image_id.clone(),
            self.field.width,
            self.field.height,
            annotator_id,
            strokes,
        )
    }

    pub fn view(&self) -> SessionView {
        SessionView {
            session_id: self.session_id.clone(),
            image_id: self.field.image_id.clone(),
            width: self.field.width,
            height: self.field.height,
            status: self.status,
            score: self.score,
            collected: self.collected().count(),
            triggered: self.triggered().count(),
            reward_count: self.field.reward_points.len(),
            recent_events: self.recent.iter().copied().collect(),
        }
    }
}

/// Replays a finished drawing through a fresh session.
pub fn classify_submission(d: &Drawing, field: &RewardField, cutoff: f64) -> Result<Verdict> {
    crate::error::check_dims(field.dims(), d.dims())?;
    let mut s = GameSession::new("replay", field.clone());
    for stroke in d.strokes() {
        s.score_segment(stroke.points())?;
        s.end_stroke()?;
    }
    s.finalize(cutoff)
}
