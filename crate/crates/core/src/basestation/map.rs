//! Equirectangular projection of a lat/lon rectangle onto a pixel canvas.

use serde::{Deserialize, Serialize};

use crate::geodesy::GeoPoint;

/// Smallest span (degrees) a view is allowed to have, about 1 m.
const MIN_SPAN_DEG: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoBounds {
    pub north: f64,
    pub south: f64,
    pub west: f64,
    pub east: f64,
}

impl GeoBounds {
    /// Rectangle spanned by two opposite corners.
    pub fn from_corners(a: GeoPoint, b: GeoPoint) -> Self {
        let mut bounds = Self {
            north: a.lat().max(b.lat()),
            south: a.lat().min(b.lat()),
            west: a.lon().min(b.lon()),
            east: a.lon().max(b.lon()),
        };
        bounds.ensure_span();
        bounds
    }

    pub fn around(p: GeoPoint) -> Self {
        Self::from_corners(p, p)
    }

    fn ensure_span(&mut self) {
        if self.north - self.south < MIN_SPAN_DEG {
            let mid = (self.north + self.south) / 2.0;
            self.north = (mid + MIN_SPAN_DEG / 2.0).min(90.0);
            self.south = self.north - MIN_SPAN_DEG;
        }
        if self.east - self.west < MIN_SPAN_DEG {
            let mid = (self.east + self.west) / 2.0;
            self.west = mid - MIN_SPAN_DEG / 2.0;
            self.east = mid + MIN_SPAN_DEG / 2.0;
        }
    }

    pub fn contains(&self, p: GeoPoint) -> bool {
        (self.south..=self.north).contains(&p.lat()) && (self.west..=self.east).contains(&p.lon())
    }

    pub fn expand_to(&mut self, p: GeoPoint) {
        self.north = self.north.max(p.lat());
        self.south = self.south.min(p.lat());
        self.west = self.west.min(p.lon());
        self.east = self.east.max(p.lon());
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.north + self.south) / 2.0, (self.west + self.east) / 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Canvas {
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapView {
    bounds: GeoBounds,
    trail: Vec<GeoPoint>,
    waypoints: Vec<GeoPoint>,
}

impl MapView {
    pub fn new(bounds: GeoBounds) -> Self {
        Self { bounds, trail: Vec::new(), waypoints: Vec::new() }
    }

    pub fn bounds(&self) -> GeoBounds {
        self.bounds
    }

    pub fn trail(&self) -> &[GeoPoint] {
        &self.trail
    }

    pub fn waypoints(&self) -> &[GeoPoint] {
        &self.waypoints
    }

    /// Adds a trail point, growing the bounds if it falls outside them.
    pub fn push_trail(&mut self, p: GeoPoint) {
        self.bounds.expand_to(p);
        self.trail.push(p);
    }

    pub fn set_waypoints(&mut self, points: Vec<GeoPoint>) {
        for p in &points {
            self.bounds.expand_to(*p);
        }
        self.waypoints = points;
    }

    /// Pixel position of `point`, (0, 0) at the north-west corner.
    pub fn project(&mut self, point: GeoPoint, canvas: Canvas) -> (f64, f64) {
        if !self.bounds.contains(point) {
            self.bounds.expand_to(point);
        }
        project_in(&self.bounds, point, canvas)
    }

    /// Inverse of [`MapView::project`].
    pub fn unproject(&self, px: (f64, f64), canvas: Canvas) -> Option<GeoPoint> {
        let b = &self.bounds;
        let lon = b.west + px.0 / canvas.width as f64 * (b.east - b.west);
        let lat = b.north - px.1 / canvas.height as f64 * (b.north - b.south);
        GeoPoint::new(lat, lon).ok()
    }
}

pub fn project_in(b: &GeoBounds, point: GeoPoint, canvas: Canvas) -> (f64, f64) {
    let x = (point.lon() - b.west) / (b.east - b.west) * canvas.width as f64;
    let y = (b.north - point.lat()) / (b.north - b.south) * canvas.height as f64;
    (x, y)
}

/// Free-function form of [`MapView::project`].
pub fn project_to_map(point: GeoPoint, view: &mut MapView, canvas: Canvas) -> (f64, f64) {
    view.project(point, canvas)
}
