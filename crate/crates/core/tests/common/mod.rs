#![allow(dead_code)]

pub mod random;

use mmptol_core::{
    ElementaryConnection, Frame, GaugeKind, KindBounds, Locator, MachiningOperation, NominalPart, ProcessPlan,
    RawSurface, SetUp, Surface, VirtualGauge, ZoneForm, ZoneMobility,
};

pub const S3: f64 = 0.866_025_403_784_438_6;
pub const ROT: f64 = 0.0005;
pub const TRANS: f64 = 0.01;
pub const WIDTH: f64 = 0.5;

pub fn square(half: f64) -> Vec<[f64; 3]> {
    vec![[-half, -half, 0.0], [half, -half, 0.0], [half, half, 0.0], [-half, half, 0.0]]
}

pub fn plane(id: u32, origin: [f64; 3], x: [f64; 3], y: [f64; 3], half: f64) -> Surface {
    Surface::plane(id, Frame::from_axes(origin, x, y).unwrap(), square(half))
}

/// Block with a boss: raw faces 1, 2, 10; set-up 1 machines the bottom 3
/// and the boss 4, set-up 2 the side 5, set-ups 3 and 4 the parallel faces
/// 6 and 7 inclined at 30°.
pub fn part() -> NominalPart {
    let n = [0.5, S3, 0.0];
    NominalPart::new([
        plane(1, [0.0, 0.0, 55.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], 30.0),
        plane(2, [-40.0, 0.0, 25.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0], 20.0),
        plane(10, [0.0, 30.0, 25.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0], 20.0),
        plane(3, [0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, -1.0, 0.0], 30.0),
        Surface::cylinder(
            4,
            Frame::from_axes([0.0, 0.0, 10.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]).unwrap(),
            10.0,
            0.0,
            40.0,
        ),
        plane(5, [50.0, -20.0, 25.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0], 20.0),
        plane(6, [40.0 * n[0], 40.0 * n[1], 25.0], [-S3, 0.5, 0.0], [0.0, 0.0, 1.0], 25.0),
        plane(7, [20.0 * n[0], 20.0 * n[1], 25.0], [S3, -0.5, 0.0], [0.0, 0.0, 1.0], 25.0),
    ])
}

pub fn bounds() -> KindBounds {
    KindBounds::symmetric(ROT, TRANS)
}

fn slipping(surface: u32, rank: u32, locator: Locator) -> ElementaryConnection {
    ElementaryConnection::slipping(surface, rank, locator, bounds())
}

fn finishing_setup(id: u32, surface: u32) -> SetUp {
    SetUp {
        id,
        connections: vec![
            slipping(3, 1, Locator::Planar),
            slipping(4, 2, Locator::Centering { long: false }),
            slipping(5, 3, Locator::Planar),
        ],
        machining: vec![MachiningOperation { surface, bounds: bounds() }],
        constraints: vec![],
    }
}

pub fn plan() -> ProcessPlan {
    let raw_bounds = KindBounds::symmetric(0.002, 0.1);
    ProcessPlan {
        part: part(),
        raw: [1, 2, 10].map(|surface| RawSurface { surface, bounds: raw_bounds }).to_vec(),
        setups: vec![
            SetUp {
                id: 1,
                connections: vec![
                    slipping(1, 1, Locator::Planar),
                    slipping(2, 2, Locator::Planar),
                    slipping(10, 3, Locator::Planar),
                ],
                machining: vec![
                    MachiningOperation { surface: 3, bounds: bounds() },
                    MachiningOperation { surface: 4, bounds: bounds() },
                ],
                constraints: vec![],
            },
            SetUp {
                id: 2,
                connections: vec![
                    slipping(3, 1, Locator::Planar),
                    slipping(4, 2, Locator::Centering { long: false }),
                    slipping(10, 3, Locator::Planar),
                ],
                machining: vec![MachiningOperation { surface: 5, bounds: bounds() }],
                constraints: vec![],
            },
            finishing_setup(3, 6),
            finishing_setup(4, 7),
        ],
    }
}

/// Location of 6 relative to |7|3|4|.
pub fn functional_gauge() -> VirtualGauge {
    VirtualGauge {
        kind: GaugeKind::Functional { gauge: 1 },
        datums: vec![7, 3, 4],
        toleranced: 6,
        width: WIDTH,
        zone: ZoneForm::TwoPlanes,
        mobility: ZoneMobility::Location,
    }
}

/// Slab: raw top 1 and sides 2, 10; set-up 1 machines the bottom 3, set-up
/// 2 the step 5 parallel to it.
pub fn slab_plan() -> ProcessPlan {
    let part = NominalPart::new([
        plane(1, [0.0, 0.0, 20.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], 30.0),
        plane(2, [-30.0, 0.0, 10.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0], 10.0),
        plane(10, [0.0, 30.0, 10.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0], 10.0),
        plane(3, [0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, -1.0, 0.0], 30.0),
        plane(5, [15.0, 0.0, 15.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], 10.0),
    ]);
    let raw_bounds = KindBounds::symmetric(0.002, 0.1);
    ProcessPlan {
        part,
        raw: [1, 2, 10].map(|surface| RawSurface { surface, bounds: raw_bounds }).to_vec(),
        setups: vec![
            SetUp {
                id: 1,
                connections: vec![
                    slipping(1, 1, Locator::Planar),
                    slipping(2, 2, Locator::Planar),
                    slipping(10, 3, Locator::Planar),
                ],
                machining: vec![MachiningOperation { surface: 3, bounds: bounds() }],
                constraints: vec![],
            },
            SetUp {
                id: 2,
                connections: vec![
                    slipping(3, 1, Locator::Planar),
                    slipping(2, 2, Locator::Planar),
                    slipping(10, 3, Locator::Planar),
                ],
                machining: vec![MachiningOperation { surface: 5, bounds: bounds() }],
                constraints: vec![],
            },
        ],
    }
}

/// Location of 5 relative to 3.
pub fn slab_gauge(width: f64) -> VirtualGauge {
    VirtualGauge {
        kind: GaugeKind::Functional { gauge: 1 },
        datums: vec![3],
        toleranced: 5,
        width,
        zone: ZoneForm::TwoPlanes,
        mobility: ZoneMobility::Location,
    }
}
