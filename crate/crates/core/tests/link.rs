use proptest::prelude::*;
use ris_core::link::{received_power_ratio, scenario_table, LinkScenario};

fn scenario(r1: f64, r2: f64) -> LinkScenario {
    LinkScenario {
        name: String::new(),
        r1,
        r2,
        g_t_db: 15.0,
        g_r_db: 12.0,
        s11_db: -20.0,
        s22_db: -14.0,
        theta_inc: 0.2,
        theta_ref: 0.6,
        l_x: 0.3,
        l_y: 0.25,
        wavelength: 0.0577,
        g_ris_db: Some(15.4),
    }
}

proptest! {
    #[test]
    fn swapping_the_horns_is_symmetric(r1 in 0.5..50.0f64, r2 in 0.5..50.0f64) {
        let s = scenario(r1, r2);
        let a = received_power_ratio(&s).unwrap();
        let b = received_power_ratio(&s.reversed()).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn twenty_db_per_decade_in_each_distance(r1 in 0.5..50.0f64, r2 in 0.5..50.0f64) {
        let base = received_power_ratio(&scenario(r1, r2)).unwrap();
        prop_assert!((received_power_ratio(&scenario(10.0 * r1, r2)).unwrap() - base + 20.0).abs() < 1e-9);
        prop_assert!((received_power_ratio(&scenario(r1, 10.0 * r2)).unwrap() - base + 20.0).abs() < 1e-9);
    }
}

#[test]
fn lengths_in_millimetres_give_the_same_budget() {
    let m = scenario(2.7, 4.2);
    let mm = LinkScenario { r1: 2700.0, r2: 4200.0, l_x: 300.0, l_y: 250.0, wavelength: 57.7, ..m.clone() };
    assert!((received_power_ratio(&m).unwrap() - received_power_ratio(&mm).unwrap()).abs() < 1e-9);
}

#[test]
fn table_text_lists_every_row() {
    let t = scenario_table(&[scenario(2.7, 4.2), scenario(5.0, 5.0)]).unwrap();
    let text = t.to_text();
    assert_eq!(text.lines().count(), 3);
    assert!(t.delta_db(1, 0).unwrap() < 0.0);
}
