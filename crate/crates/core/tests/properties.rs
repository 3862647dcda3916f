use gridiron_core::calibration::{calibration, overall_from_bins};
use gridiron_core::ep::{field_goal_ep, EpFeatures};
use gridiron_core::pbp::{compute_weights, label_next_score, read_plays, write_plays, Half, ScoringEvent};
use gridiron_core::state::State;
use gridiron_core::synth::{generate_league, reference_ep_coefficients, state_play, true_ep_probabilities, SynthConfig};
use gridiron_core::war::{ipaa, ipar, quantile, Triple};
use gridiron_core::wp::WpFeatures;
use proptest::prelude::*;

fn any_state() -> impl Strategy<Value = State> {
    (1u8..=4, 1u32..=30, 1u32..=99, 0.0..1800.0f64, any::<bool>(), -30i32..=30, 0u8..=3, 0u8..=3).prop_map(
        |(down, ytg, yardline, sh, second, diff, to, td)| State {
            down,
            yards_to_go: ytg.min(yardline),
            yardline,
            seconds_half: sh,
            seconds_game: sh + if second { 0.0 } else { 1800.0 },
            half: if second { Half::Second } else { Half::First },
            score_differential: diff,
            timeouts_off: to,
            timeouts_def: td,
        },
    )
}

fn flip(e: ScoringEvent) -> ScoringEvent {
    ScoringEvent::from_index(6 - e.index())
}

proptest! {
    #[test]
    fn ep_indicators_follow_the_state(s in any_state()) {
        let f = EpFeatures::from_state(&s);
        let row = f.row();
        prop_assert_eq!(f.gtg, s.yardline <= s.yards_to_go);
        prop_assert_eq!(f.utm, s.seconds_half < 120.0);
        prop_assert!(row.iter().all(|v| v.is_finite()));
        prop_assert_eq!(row[0], 1.0);
    }

    #[test]
    fn wp_ratio_is_lead_over_time(ep in -7.0..7.0f64, diff in -40i32..40, sg in 0.0..3600.0f64, sh in 0.0..1800.0f64) {
        let f = WpFeatures::new(ep, diff, sg, Half::Second, sh, 2, 1);
        prop_assert!((f.exp_score_diff - (ep + f64::from(diff))).abs() < 1e-12);
        prop_assert!((f.exp_score_time_ratio - f.exp_score_diff / (sg + 1.0)).abs() < 1e-12);
        let m = f.mirrored();
        prop_assert_eq!(m.exp_score_diff, -f.exp_score_diff);
        prop_assert_eq!((m.timeouts_off, m.timeouts_def), (f.timeouts_def, f.timeouts_off));
        prop_assert_eq!(m.mirrored(), f);
    }

    #[test]
    fn expectation_of_any_distribution_is_bounded(s in any_state()) {
        let p = true_ep_probabilities(&reference_ep_coefficients(), &EpFeatures::from_state(&s));
        let ep: f64 = ScoringEvent::ALL.iter().zip(&p).map(|(e, q)| e.points() * q).sum();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!((-7.0..=7.0).contains(&ep));
    }

    #[test]
    fn field_goal_ep_interpolates(p in 0.0..=1.0f64, miss in -7.0..7.0f64) {
        let v = field_goal_ep(p, miss);
        prop_assert!((v - (3.0 * p - (1.0 - p) * miss)).abs() < 1e-12);
        prop_assert!(v <= 3.0f64.max(-miss) + 1e-12 && v >= 3.0f64.min(-miss) - 1e-12);
    }

    #[test]
    fn weights_lie_in_unit_interval(rows in prop::collection::vec((0i32..30, 0u32..6), 2..40)) {
        let mut labeled: Vec<_> = rows
            .iter()
            .enumerate()
            .map(|(i, &(diff, gap))| {
                let s = State {
                    down: 1, yards_to_go: 10, yardline: 50, seconds_half: 900.0, seconds_game: 2700.0,
                    half: Half::First, score_differential: diff, timeouts_off: 3, timeouts_def: 3,
                };
                gridiron_core::pbp::LabeledPlay {
                    play: state_play(&s, 2017, "g".into(), i as u64),
                    next_score: ScoringEvent::NoScore,
                    drive_gap: gap,
                    weight: f64::NAN,
                }
            })
            .collect();
        compute_weights(&mut labeled);
        prop_assert!(labeled.iter().all(|l| (0.0..=1.0).contains(&l.weight)));
        // Either the combined score is constant or it spans the whole interval.
        let all_one = labeled.iter().all(|l| l.weight == 1.0);
        prop_assert!(all_one || (labeled.iter().any(|l| l.weight == 0.0) && labeled.iter().any(|l| l.weight == 1.0)));
    }

    #[test]
    fn war_components_add_up(
        kp in 0usize..600, kr in 0usize..300,
        a in -0.3..0.3f64, y in -0.3..0.3f64, r in -0.3..0.3f64,
        ra in -0.3..0.3f64, ry in -0.3..0.3f64, rr in -0.3..0.3f64,
    ) {
        let ipa = Triple { air: a, yac: y, rush: r };
        let repl = Triple { air: ra, yac: ry, rush: rr };
        let (kp, kr) = (kp as f64, kr as f64);
        let above = ipaa(kp, kr, &ipa);
        let shadow = ipaa(kp, kr, &repl);
        let v = ipar(kp, kr, &ipa, &repl);
        prop_assert!((v.air - (above.air - shadow.air)).abs() < 1e-12);
        prop_assert!((v.yac - (above.yac - shadow.yac)).abs() < 1e-12);
        prop_assert!((v.rush - (above.rush - shadow.rush)).abs() < 1e-12);
        prop_assert!((v.total() - (v.air + v.yac + v.rush)).abs() < 1e-12);
        prop_assert_eq!(ipar(kp, kr, &repl, &repl).total(), 0.0);
    }

    #[test]
    fn quantiles_are_ordered(mut xs in prop::collection::vec(-10.0..10.0f64, 1..60)) {
        xs.sort_by(f64::total_cmp);
        let (a, b, c) = (quantile(&xs, 0.025), quantile(&xs, 0.5), quantile(&xs, 0.975));
        prop_assert!(xs[0] <= a && a <= b && b <= c && c <= xs[xs.len() - 1]);
    }

    #[test]
    fn calibration_recomputes_from_bins(rows in prop::collection::vec((0.0..1.0f64, 0usize..3), 1..80)) {
        let preds: Vec<Vec<f64>> = rows.iter().map(|&(p, _)| vec![p, (1.0 - p) / 2.0, (1.0 - p) / 2.0]).collect();
        let actual: Vec<usize> = rows.iter().map(|r| r.1).collect();
        let rep = calibration(&preds, &actual, &["a", "b", "c"]);
        prop_assert!((overall_from_bins(&rep.bins) - rep.overall).abs() <= 1e-12);
        for e in &rep.events {
            prop_assert_eq!(rep.bins.iter().filter(|b| b.event == e.event).map(|b| b.n).sum::<usize>(), e.n);
        }
        let per_event: f64 = rep.events.iter().map(|e| e.n as f64 * e.error).sum::<f64>()
            / rep.events.iter().map(|e| e.n).sum::<usize>() as f64;
        prop_assert!((per_event - rep.overall).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn simulated_leagues_round_trip_and_label_consistently(seed in any::<u64>()) {
        let league = generate_league(&SynthConfig { seasons: vec![2017], teams: 4, seed }).unwrap();
        let plays = league.plays().unwrap();
        let mut buf = Vec::new();
        write_plays(&mut buf, &plays).unwrap();
        prop_assert_eq!(&read_plays(buf.as_slice()).unwrap(), &plays);

        // Index of the next scoring play in the same game and half.
        let next_score: Vec<Option<usize>> = (0..plays.len())
            .map(|i| {
                (i..plays.len())
                    .take_while(|&j| plays[j].game_id == plays[i].game_id && plays[j].half == plays[i].half)
                    .find(|&j| plays[j].score().is_some() && !plays[j].play_type.is_pat())
            })
            .collect();
        let labeled = label_next_score(&plays).unwrap().labeled;
        let by_key: std::collections::HashMap<(String, u64), &gridiron_core::pbp::LabeledPlay> =
            labeled.iter().map(|l| ((l.play.game_id.clone(), l.play.play_id), l)).collect();
        for i in 1..plays.len() {
            let (a, b) = (&plays[i - 1], &plays[i]);
            let (Some(la), Some(lb)) = (by_key.get(&(a.game_id.clone(), a.play_id)), by_key.get(&(b.game_id.clone(), b.play_id))) else {
                continue;
            };
            if next_score[i - 1] == next_score[i] && a.posteam != b.posteam {
                prop_assert_eq!(lb.next_score, flip(la.next_score));
            }
            if lb.next_score == ScoringEvent::NoScore {
                prop_assert_eq!(lb.drive_gap, 0);
            }
        }
    }
}
