use contourbench::consensus::{consensus_drawings, ConsensusOptions};
use contourbench::game::{generate_field, Boundary, FieldParams, RewardField};
use contourbench::matching::Tolerance;
use contourbench::raster::{threshold, BinaryMap, SoftMap};
use contourbench::stroke::{rasterize_drawing, Dataset};
use contourbench::Error;

/// Boundary map used to build an image's reward field: the precomputed
/// `fields_src/<id>.png` if present, otherwise the rasterized consensus of
/// the image's drawings.
pub fn boundary_map(ds: &Dataset, image_id: &str, params: &FieldParams) -> Result<BinaryMap, Error> {
    let src = ds.field_source(image_id);
    if src.is_file() {
        let soft = SoftMap::load_png(&src)?;
        return threshold(&soft, params.boundary_t);
    }
    let drawings = ds.drawings(image_id)?;
    let consensus = match drawings.len() {
        0 => return Err(Error::Empty("drawings for image")),
        1 => drawings.into_iter().next().expect("one drawing"),
        _ => {
            let (w, h) = drawings[0].dims();
            consensus_drawings(&drawings, &Tolerance::default_for(w, h), &ConsensusOptions::default())?.consensus_drawing
        }
    };
    rasterize_drawing(&consensus, 1.0)
}

pub fn field_for_image(ds: &Dataset, image_id: &str, params: &FieldParams, seed: u64) -> Result<RewardField, Error> {
    let map = boundary_map(ds, image_id, params)?;
    generate_field(image_id, Boundary::Binary(&map), params, seed)
}
