#![allow(dead_code)]

use std::path::Path;

use contourbench::game::FieldParams;
use contourbench::raster::BinaryMap;
use contourbench::stroke::{serialize_drawing, Drawing, Point, Stroke};

pub const W: u32 = 120;
pub const H: u32 = 120;

pub fn square_points() -> Vec<Point> {
    [(20.0, 20.0), (100.0, 20.0), (100.0, 100.0), (20.0, 100.0), (20.0, 20.0)]
        .iter()
        .map(|&(x, y)| Point::new(x, y))
        .collect()
}

pub fn square_drawing() -> Drawing {
    Drawing::new("sq", W, H, None, vec![Stroke::new(0, square_points()).unwrap()]).unwrap()
}

pub fn test_params() -> FieldParams {
    FieldParams { n_reward: 20, n_penalty: 10, ..Default::default() }
}

/// Dataset with one image `sq`: a square outline as boundary map and five
/// identical drawings of it.
pub fn write_dataset(root: &Path) {
    std::fs::create_dir_all(root.join("drawings/sq")).unwrap();
    std::fs::create_dir_all(root.join("images")).unwrap();
    std::fs::create_dir_all(root.join("fields_src")).unwrap();
    let d = square_drawing();
    for k in 0..5 {
        std::fs::write(root.join(format!("drawings/sq/{k}.json")), serialize_drawing(&d)).unwrap();
    }
    let raster = contourbench::stroke::rasterize_drawing(&d, 1.0).unwrap();
    raster.save_png(&root.join("fields_src/sq.png")).unwrap();
    BinaryMap::new(W, H).save_png(&root.join("images/sq.png")).unwrap();
}
