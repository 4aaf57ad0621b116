//! Chip-capacity arithmetic for square multiplier arrays.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityInput {
    pub unit_width_um: f64,
    pub unit_height_um: f64,
    pub chip_edge_mm: f64,
    /// Keep-out on each edge of the chip.
    pub margin_um: f64,
    pub chips: u64,
}

impl Default for CapacityInput {
    fn default() -> Self {
        Self {
            unit_width_um: 515.0,
            unit_height_um: 530.0,
            chip_edge_mm: 19.0,
            margin_um: 200.0,
            chips: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CapacityReport {
    pub units_across: u64,
    pub units_down: u64,
    /// Units in the largest square array that fits one chip.
    pub side: u64,
    pub units_per_chip: u64,
    pub total_units: u64,
    /// Factor width whose `bits²` cell array fits in `total_units`.
    pub max_bits: u64,
}

pub fn estimate(input: &CapacityInput) -> Result<CapacityReport> {
    let dims = [
        ("unit width", input.unit_width_um),
        ("unit height", input.unit_height_um),
        ("chip edge", input.chip_edge_mm),
    ];
    for (name, v) in dims {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
        }
    }
    if !(input.margin_um >= 0.0) {
        return Err(Error::Parameter("margin must be non-negative".into()));
    }
    let usable = input.chip_edge_mm * 1000.0 - 2.0 * input.margin_um;
    if !(usable > 0.0) {
        return Err(Error::Parameter(format!(
            "margins of {} µm leave no usable area on a {} mm chip",
            input.margin_um, input.chip_edge_mm
        )));
    }
    let units_across = (usable / input.unit_width_um).floor() as u64;
    let units_down = (usable / input.unit_height_um).floor() as u64;
    let side = units_across.min(units_down);
    let units_per_chip = side * side;
    let total_units = units_per_chip * input.chips;
    Ok(CapacityReport {
        units_across,
        units_down,
        side,
        units_per_chip,
        total_units,
        max_bits: total_units.isqrt(),
    })
}
