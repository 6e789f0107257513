//! JSON schemas of every report, shipped under `schemas/` and embedded here.

/// `(name, schema text)`; the name is the command path joined by dashes.
pub const SCHEMAS: [(&str, &str); 13] = [
    ("graphs-enumerate", include_str!("../../../schemas/graphs-enumerate.schema.json")),
    ("intersect", include_str!("../../../schemas/intersect.schema.json")),
    ("verify", include_str!("../../../schemas/verify.schema.json")),
    ("schur", include_str!("../../../schemas/schur.schema.json")),
    ("virasoro-oscillator", include_str!("../../../schemas/virasoro-oscillator.schema.json")),
    ("virasoro-target", include_str!("../../../schemas/virasoro-target.schema.json")),
    ("matrix-moment", include_str!("../../../schemas/matrix-moment.schema.json")),
    ("matrix-genus", include_str!("../../../schemas/matrix-genus.schema.json")),
    ("matrix-match", include_str!("../../../schemas/matrix-match.schema.json")),
    ("matrix-normalization", include_str!("../../../schemas/matrix-normalization.schema.json")),
    ("matrix-hciz", include_str!("../../../schemas/matrix-hciz.schema.json")),
    ("torsion", include_str!("../../../schemas/torsion.schema.json")),
    ("suite", include_str!("../../../schemas/suite.schema.json")),
];

pub fn schema(name: &str) -> Option<serde_json::Value> {
    SCHEMAS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| serde_json::from_str(text).expect("shipped schemas are valid JSON"))
}
