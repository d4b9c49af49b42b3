use crate::analyze::{
    read_json, CellMetrics, CohortCellMetrics, Curve, DeltaRow, EwaCalibration, HumanBlock,
    RegressionTable, TokenRow,
};
use crate::oos::{OosRow, ValidityRow};
use crate::svg::{diverging_color, sequential_color, Svg};
use crate::traces::write_atomic;
use crate::RunnerError;
use llm_agent::{AgentKind, ContextKind};
use std::path::Path;

/// Round half to even at two decimals; the only number formatting used in
/// rendered tables.
pub fn fmt2(value: f64) -> String {
    if !value.is_finite() {
        return String::new();
    }
    let mut scaled = (value * 100.0).round_ties_even() / 100.0;
    if scaled == 0.0 {
        scaled = 0.0; // normalize -0.00
    }
    format!("{scaled:.2}")
}

fn fmt2_opt(value: Option<f64>) -> String {
    value.map(fmt2).unwrap_or_default()
}

/// The six context/instruction combinations in sophistication order.
pub const CM_ORDER: [(ContextKind, bool); 6] = [
    (ContextKind::None, false),
    (ContextKind::None, true),
    (ContextKind::SimpleProfile, false),
    (ContextKind::SimpleProfile, true),
    (ContextKind::Biography, false),
    (ContextKind::Biography, true),
];

pub fn cm_label(context: ContextKind, moa: bool) -> String {
    let c = match context {
        ContextKind::None => "cnone",
        ContextKind::SimpleProfile => "csim",
        ContextKind::Biography => "cbio",
    };
    format!("{c}_m{}", u8::from(moa))
}

/// Render every table (rounded CSV + JSON) and, when `svg` is set, every
/// figure from a metrics directory. The renderer only formats numbers that
/// already exist in the metrics files.
pub fn report(metrics_dir: &Path, out_dir: &Path, svg: bool) -> Result<(), RunnerError> {
    std::fs::create_dir_all(out_dir).map_err(crate::io_err(out_dir))?;

    let cells: Vec<CellMetrics> = read_json(metrics_dir, "cells.json")?;
    let cohort_cells: Vec<CohortCellMetrics> = read_json(metrics_dir, "cohort_cells.json")?;
    let deltas: Vec<DeltaRow> = read_json(metrics_dir, "delta.json")?;
    let regressions: Vec<RegressionTable> = read_json(metrics_dir, "regressions.json")?;
    let tokens: Vec<TokenRow> = read_json(metrics_dir, "tokens.json")?;
    let human: HumanBlock = read_json(metrics_dir, "human.json")?;
    let ewa: EwaCalibration = read_json(metrics_dir, "ewa_calibration.json")?;
    let curves: Vec<Curve> = read_json(metrics_dir, "kde_curves.json")?;
    let validity: Option<Vec<ValidityRow>> = read_json(metrics_dir, "validity.json").ok();
    let oos: Option<Vec<OosRow>> = read_json(metrics_dir, "oos_comparison.json").ok();

    let mut models: Vec<String> = cells.iter().filter_map(|c| c.model_id.clone()).collect();
    models.sort_by_key(|id| {
        cells
            .iter()
            .find(|c| c.model_id.as_deref() == Some(id))
            .and_then(|c| c.model_ordinal)
            .unwrap_or(0)
    });
    models.dedup();

    render_sophistication_effects(out_dir, &regressions)?;
    render_wasserstein_pooled(out_dir, &cells, &models)?;
    render_zero_rates(out_dir, &cells, &models, &human)?;
    render_wasserstein_cohort(out_dir, &cells, &cohort_cells, &models)?;
    render_cohort_regression(out_dir, &regressions)?;
    render_token_costs(out_dir, &tokens)?;
    render_delta_table(out_dir, &deltas, &models)?;
    render_ewa_summary(out_dir, &ewa)?;
    if let Some(validity_rows) = &validity {
        render_validity_table(out_dir, validity_rows)?;
    }
    if let Some(oos_rows) = &oos {
        render_oos_table(out_dir, oos_rows, &models)?;
    }

    if svg {
        fig_ame_heatmap(out_dir, &cells, &models)?;
        fig_delta_heatmap(out_dir, &deltas, &models)?;
        fig_kde_grid(out_dir, &curves, &cells, &models)?;
        fig_ewa(out_dir, &curves)?;
        if let Some(validity_rows) = &validity {
            fig_validity_trend(out_dir, validity_rows, &models)?;
        }
    }
    Ok(())
}

fn write_table(
    out_dir: &Path,
    name: &str,
    headers: &[String],
    rows: &[Vec<String>],
) -> Result<(), RunnerError> {
    let mut csv = headers.join(",");
    csv.push('\n');
    for row in rows {
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    write_atomic(&out_dir.join(format!("{name}.csv")), csv.as_bytes())?;

    let json_rows: Vec<serde_json::Value> = rows
        .iter()
        .map(|row| {
            let map: serde_json::Map<String, serde_json::Value> = headers
                .iter()
                .zip(row)
                .map(|(h, v)| (h.clone(), serde_json::Value::String(v.clone())))
                .collect();
            serde_json::Value::Object(map)
        })
        .collect();
    let json = serde_json::to_string_pretty(&json_rows)?;
    write_atomic(&out_dir.join(format!("{name}.json")), json.as_bytes())?;
    Ok(())
}

fn find_cell<'a>(
    cells: &'a [CellMetrics],
    kind: AgentKind,
    model: Option<&str>,
    context: ContextKind,
    moa: bool,
) -> Option<&'a CellMetrics> {
    cells.iter().find(|c| {
        c.agent_kind == kind
            && c.model_id.as_deref() == model
            && c.context == context
            && c.moa == moa
    })
}

fn render_sophistication_effects(
    out_dir: &Path,
    regressions: &[RegressionTable],
) -> Result<(), RunnerError> {
    let metrics = ["k_level_error", "wasserstein", "zero_rate_error"];
    let mut headers = vec!["factor".to_string()];
    for m in metrics {
        headers.push(format!("{m}_coef"));
        headers.push(format!("{m}_p"));
    }
    let factor_names = ["agent_type", "llm_model", "context", "instruction"];
    let mut rows = Vec::new();
    for factor in factor_names {
        let mut row = vec![factor.to_string()];
        for metric in metrics {
            let table = regressions
                .iter()
                .find(|r| r.population == "pooled" && r.metric == metric);
            match table.and_then(|t| t.terms.iter().find(|term| term.name == factor)) {
                Some(term) => {
                    row.push(fmt2(term.coef));
                    row.push(format!("{:.4}", term.p_value));
                }
                None => {
                    row.push(String::new());
                    row.push(String::new());
                }
            }
        }
        rows.push(row);
    }
    let mut spearman_row = vec!["spearman_rho".to_string()];
    for metric in metrics {
        match regressions
            .iter()
            .find(|r| r.population == "pooled" && r.metric == metric)
        {
            Some(t) => {
                spearman_row.push(fmt2_opt(t.spearman_rho));
                spearman_row.push(
                    t.spearman_p
                        .map(|p| format!("{p:.4}"))
                        .unwrap_or_default(),
                );
            }
            None => {
                spearman_row.push(String::new());
                spearman_row.push(String::new());
            }
        }
    }
    rows.push(spearman_row);
    write_table(out_dir, "table_sophistication_effects", &headers, &rows)
}

fn render_wasserstein_pooled(
    out_dir: &Path,
    cells: &[CellMetrics],
    models: &[String],
) -> Result<(), RunnerError> {
    let mut headers = vec!["config".to_string(), "ewa".to_string()];
    for kind in ["s", "r"] {
        for model in models {
            headers.push(format!("{kind}_{model}"));
        }
    }
    let ewa_cell = cells.iter().find(|c| c.agent_kind == AgentKind::Ewa);
    let mut rows = Vec::new();
    for (context, moa) in CM_ORDER {
        let mut row = vec![cm_label(context, moa)];
        // EWA is context-free: it occupies the base configuration slot only.
        if context == ContextKind::None && !moa {
            row.push(fmt2_opt(ewa_cell.and_then(|c| c.wasserstein)));
        } else {
            row.push(String::new());
        }
        for kind in [AgentKind::Simple, AgentKind::Reasoner] {
            for model in models {
                let cell = find_cell(cells, kind, Some(model), context, moa);
                row.push(fmt2_opt(cell.and_then(|c| c.wasserstein)));
            }
        }
        rows.push(row);
    }
    write_table(out_dir, "table_wasserstein_pooled", &headers, &rows)
}

fn render_zero_rates(
    out_dir: &Path,
    cells: &[CellMetrics],
    models: &[String],
    human: &HumanBlock,
) -> Result<(), RunnerError> {
    let mut headers = vec!["agent".to_string(), "model".to_string()];
    for (context, moa) in CM_ORDER {
        headers.push(cm_label(context, moa));
    }
    let mut rows = Vec::new();
    let mut human_row = vec!["human".to_string(), "-".to_string()];
    for _ in CM_ORDER {
        human_row.push(fmt2(human.zeros_per_100_pooled));
    }
    rows.push(human_row);
    let mut ewa_row = vec!["ewa".to_string(), "-".to_string()];
    let ewa_cell = cells.iter().find(|c| c.agent_kind == AgentKind::Ewa);
    for (context, moa) in CM_ORDER {
        if context == ContextKind::None && !moa {
            ewa_row.push(fmt2_opt(ewa_cell.map(|c| c.zeros_per_100)));
        } else {
            ewa_row.push(String::new());
        }
    }
    rows.push(ewa_row);
    for kind in [AgentKind::Simple, AgentKind::Reasoner] {
        for model in models {
            let mut row = vec![
                match kind {
                    AgentKind::Simple => "s".to_string(),
                    AgentKind::Reasoner => "r".to_string(),
                    AgentKind::Ewa => unreachable!(),
                },
                model.clone(),
            ];
            for (context, moa) in CM_ORDER {
                let cell = find_cell(cells, kind, Some(model), context, moa);
                row.push(fmt2_opt(cell.map(|c| c.zeros_per_100)));
            }
            rows.push(row);
        }
    }
    write_table(out_dir, "table_zero_rates", &headers, &rows)
}

fn render_wasserstein_cohort(
    out_dir: &Path,
    cells: &[CellMetrics],
    cohort_cells: &[CohortCellMetrics],
    models: &[String],
) -> Result<(), RunnerError> {
    let mut headers = vec!["config".to_string()];
    for cohort in ["student", "expert"] {
        for kind in ["s", "r"] {
            for model in models {
                headers.push(format!("{cohort}_{kind}_{model}"));
            }
        }
    }
    let role_configs: Vec<(ContextKind, bool)> = CM_ORDER
        .into_iter()
        .filter(|(c, _)| *c != ContextKind::None)
        .collect();
    let mut rows = Vec::new();
    for (context, moa) in role_configs {
        let mut row = vec![cm_label(context, moa)];
        for cohort in ["student", "expert"] {
            for kind in [AgentKind::Simple, AgentKind::Reasoner] {
                for model in models {
                    let value = find_cell(cells, kind, Some(model), context, moa)
                        .and_then(|cell| {
                            cohort_cells
                                .iter()
                                .find(|r| r.cell_id == cell.cell_id && r.cohort == cohort)
                        })
                        .and_then(|r| r.wasserstein);
                    row.push(fmt2_opt(value));
                }
            }
        }
        rows.push(row);
    }
    write_table(out_dir, "table_wasserstein_cohort", &headers, &rows)
}

fn render_cohort_regression(
    out_dir: &Path,
    regressions: &[RegressionTable],
) -> Result<(), RunnerError> {
    let metrics = ["k_level_error", "wasserstein", "zero_rate_error"];
    let mut headers = vec!["factor".to_string()];
    for cohort in ["student", "expert"] {
        for metric in metrics {
            headers.push(format!("{cohort}_{metric}"));
        }
    }
    let factor_names = ["agent_type", "llm_model", "context", "instruction"];
    let mut rows = Vec::new();
    for factor in factor_names {
        let mut row = vec![factor.to_string()];
        for cohort in ["student", "expert"] {
            for metric in metrics {
                let cellv = regressions
                    .iter()
                    .find(|r| r.population == cohort && r.metric == metric)
                    .and_then(|t| t.terms.iter().find(|term| term.name == factor))
                    .map(|term| format!("{}{}", fmt2(term.coef), stat_lab::stars(term.p_value)))
                    .unwrap_or_default();
                row.push(cellv);
            }
        }
        rows.push(row);
    }
    let mut rho_row = vec!["spearman_rho".to_string()];
    for cohort in ["student", "expert"] {
        for metric in metrics {
            let cellv = regressions
                .iter()
                .find(|r| r.population == cohort && r.metric == metric)
                .and_then(|t| {
                    let rho = t.spearman_rho?;
                    let p = t.spearman_p?;
                    Some(format!("{}{}", fmt2(rho), stat_lab::stars(p)))
                })
                .unwrap_or_default();
            rho_row.push(cellv);
        }
    }
    rows.push(rho_row);
    write_table(out_dir, "table_cohort_regression", &headers, &rows)
}

fn render_token_costs(out_dir: &Path, tokens: &[TokenRow]) -> Result<(), RunnerError> {
    let mut headers = vec!["agent".to_string(), "direction".to_string()];
    for (context, moa) in CM_ORDER {
        headers.push(cm_label(context, moa));
    }
    let mut rows = Vec::new();
    for kind in [AgentKind::Simple, AgentKind::Reasoner] {
        for direction in ["in", "out"] {
            let mut row = vec![
                match kind {
                    AgentKind::Simple => "s".to_string(),
                    AgentKind::Reasoner => "r".to_string(),
                    AgentKind::Ewa => unreachable!(),
                },
                direction.to_string(),
            ];
            for (context, moa) in CM_ORDER {
                let value = tokens
                    .iter()
                    .find(|t| {
                        t.agent_kind == kind
                            && t.context == context
                            && t.moa == moa
                            && t.model == "all"
                    })
                    .map(|t| {
                        if direction == "in" {
                            t.mean_tokens_in
                        } else {
                            t.mean_tokens_out
                        }
                    });
                row.push(fmt2_opt(value));
            }
            rows.push(row);
        }
    }
    write_table(out_dir, "table_token_costs", &headers, &rows)
}

fn render_delta_table(
    out_dir: &Path,
    deltas: &[DeltaRow],
    models: &[String],
) -> Result<(), RunnerError> {
    let mut headers = vec!["config".to_string()];
    for kind in ["s", "r"] {
        for model in models {
            headers.push(format!("{kind}_{model}"));
        }
    }
    let role_configs: Vec<(ContextKind, bool)> = CM_ORDER
        .into_iter()
        .filter(|(c, _)| *c != ContextKind::None)
        .collect();
    let mut rows = Vec::new();
    for (context, moa) in role_configs {
        let mut row = vec![cm_label(context, moa)];
        for kind in [AgentKind::Simple, AgentKind::Reasoner] {
            for model in models {
                let value = deltas
                    .iter()
                    .find(|d| {
                        d.agent_kind == kind
                            && &d.model_id == model
                            && d.context == context
                            && d.moa == moa
                    })
                    .map(|d| format!("{}{}", fmt2(d.delta), d.star))
                    .unwrap_or_default();
                row.push(value);
            }
        }
        rows.push(row);
    }
    write_table(out_dir, "table_delta", &headers, &rows)
}

fn render_validity_table(out_dir: &Path, validity: &[ValidityRow]) -> Result<(), RunnerError> {
    let headers = vec![
        "cell_id".to_string(),
        "sophistication".to_string(),
        "validity_ratio".to_string(),
    ];
    let rows: Vec<Vec<String>> = validity
        .iter()
        .map(|v| {
            vec![
                v.cell_id.clone(),
                v.sophistication.to_string(),
                fmt2(v.validity_ratio),
            ]
        })
        .collect();
    write_table(out_dir, "table_validity", &headers, &rows)
}

fn render_oos_table(
    out_dir: &Path,
    oos: &[OosRow],
    models: &[String],
) -> Result<(), RunnerError> {
    let mut headers = vec!["config".to_string()];
    for kind in ["s", "r"] {
        for model in models {
            headers.push(format!("{kind}_{model}_w"));
            headers.push(format!("{kind}_{model}_t"));
        }
    }
    let mut rows = Vec::new();
    for (context, moa) in CM_ORDER {
        let mut row = vec![cm_label(context, moa)];
        for kind in [AgentKind::Simple, AgentKind::Reasoner] {
            for model in models {
                let entry = oos.iter().find(|o| {
                    o.agent_kind == kind
                        && &o.model_id == model
                        && o.context == context
                        && o.moa == moa
                });
                match entry {
                    Some(o) => {
                        row.push(fmt2_opt(o.wasserstein));
                        row.push(
                            o.statistic
                                .map(|s| format!("{}{}", fmt2(s), o.star))
                                .unwrap_or_default(),
                        );
                    }
                    None => {
                        row.push(String::new());
                        row.push(String::new());
                    }
                }
            }
        }
        rows.push(row);
    }
    write_table(out_dir, "table_oos_comparison", &headers, &rows)
}

fn render_ewa_summary(out_dir: &Path, ewa: &EwaCalibration) -> Result<(), RunnerError> {
    let headers = vec!["quantity".to_string(), "value".to_string()];
    let rows = vec![
        vec!["analytic_mean".into(), fmt2(ewa.analytic_mean)],
        vec!["analytic_sd".into(), fmt2(ewa.analytic_sd)],
        vec!["analytic_zero_mass".into(), format!("{:.4}", ewa.analytic_zero_mass)],
        vec!["analytic_mean_k".into(), fmt2(ewa.analytic_mean_k)],
        vec!["sampled_mean".into(), fmt2_opt(ewa.sampled_mean)],
        vec!["sampled_sd".into(), fmt2_opt(ewa.sampled_sd)],
        vec![
            "sampled_zero_count".into(),
            ewa.sampled_zero_count.to_string(),
        ],
        vec!["iterated_mean".into(), fmt2(ewa.iterated_mean)],
        vec!["iterated_sd".into(), fmt2(ewa.iterated_sd)],
        vec!["iterated_zero_rate".into(), format!("{:.4}", ewa.iterated_zero_rate)],
        vec!["reference_mean_k".into(), fmt2(ewa.reference_mean_k)],
    ];
    write_table(out_dir, "table_ewa_calibration", &headers, &rows)
}

// ---------------------------------------------------------------------------
// Figures
// ---------------------------------------------------------------------------

const CELL_W: f64 = 86.0;
const CELL_H: f64 = 34.0;
const MARGIN: f64 = 110.0;

fn fig_ame_heatmap(
    out_dir: &Path,
    cells: &[CellMetrics],
    models: &[String],
) -> Result<(), RunnerError> {
    let ames: Vec<f64> = cells.iter().filter_map(|c| c.ame).collect();
    let (min, max) = bounds(&ames);
    let panel_h = 40.0 + 3.0 * CELL_H;
    let width = MARGIN + 6.0 * CELL_W + 20.0;
    let height = 20.0 + models.len() as f64 * (panel_h + 30.0);
    let mut svg = Svg::new(width, height);

    for (m_idx, model) in models.iter().enumerate() {
        let top = 20.0 + m_idx as f64 * (panel_h + 30.0);
        svg.text(MARGIN, top, 13.0, "start", &format!("mean k-level error vs humans - {model}"));
        for (col, (context, moa)) in CM_ORDER.iter().enumerate() {
            svg.text(
                MARGIN + col as f64 * CELL_W + CELL_W / 2.0,
                top + 16.0,
                10.0,
                "middle",
                &cm_label(*context, *moa),
            );
        }
        for (row_idx, kind) in [AgentKind::Ewa, AgentKind::Simple, AgentKind::Reasoner]
            .iter()
            .enumerate()
        {
            let y = top + 24.0 + row_idx as f64 * CELL_H;
            let label = match kind {
                AgentKind::Ewa => "ewa",
                AgentKind::Simple => "simple",
                AgentKind::Reasoner => "reasoner",
            };
            svg.text(MARGIN - 8.0, y + CELL_H / 2.0 + 4.0, 11.0, "end", label);
            for (col, (context, moa)) in CM_ORDER.iter().enumerate() {
                let x = MARGIN + col as f64 * CELL_W;
                let value = if *kind == AgentKind::Ewa {
                    if *context == ContextKind::None && !*moa {
                        cells
                            .iter()
                            .find(|c| c.agent_kind == AgentKind::Ewa)
                            .and_then(|c| c.ame)
                    } else {
                        None
                    }
                } else {
                    find_cell(cells, *kind, Some(model), *context, *moa).and_then(|c| c.ame)
                };
                match value {
                    Some(v) => {
                        svg.rect(x, y, CELL_W - 2.0, CELL_H - 2.0, &sequential_color(v, min, max), "#999999");
                        svg.text(x + CELL_W / 2.0 - 1.0, y + CELL_H / 2.0 + 4.0, 11.0, "middle", &fmt2(v));
                    }
                    None => {
                        svg.rect(x, y, CELL_W - 2.0, CELL_H - 2.0, "#f2f2f2", "#cccccc");
                    }
                }
            }
        }
    }
    write_atomic(&out_dir.join("fig_ame_heatmap.svg"), svg.finish().as_bytes())
}

fn fig_delta_heatmap(
    out_dir: &Path,
    deltas: &[DeltaRow],
    models: &[String],
) -> Result<(), RunnerError> {
    let values: Vec<f64> = deltas.iter().map(|d| d.delta).collect();
    let extent = values
        .iter()
        .fold(0.1f64, |acc, v| acc.max(v.abs()));
    let role_configs: Vec<(ContextKind, bool)> = CM_ORDER
        .into_iter()
        .filter(|(c, _)| *c != ContextKind::None)
        .collect();
    let panel_h = 40.0 + 2.0 * CELL_H;
    let width = MARGIN + role_configs.len() as f64 * CELL_W + 20.0;
    let height = 20.0 + models.len() as f64 * (panel_h + 30.0);
    let mut svg = Svg::new(width, height);

    for (m_idx, model) in models.iter().enumerate() {
        let top = 20.0 + m_idx as f64 * (panel_h + 30.0);
        svg.text(MARGIN, top, 13.0, "start", &format!("cohort k-gap delta - {model}"));
        for (col, (context, moa)) in role_configs.iter().enumerate() {
            svg.text(
                MARGIN + col as f64 * CELL_W + CELL_W / 2.0,
                top + 16.0,
                10.0,
                "middle",
                &cm_label(*context, *moa),
            );
        }
        for (row_idx, kind) in [AgentKind::Simple, AgentKind::Reasoner].iter().enumerate() {
            let y = top + 24.0 + row_idx as f64 * CELL_H;
            let label = if *kind == AgentKind::Simple { "simple" } else { "reasoner" };
            svg.text(MARGIN - 8.0, y + CELL_H / 2.0 + 4.0, 11.0, "end", label);
            for (col, (context, moa)) in role_configs.iter().enumerate() {
                let x = MARGIN + col as f64 * CELL_W;
                let entry = deltas.iter().find(|d| {
                    d.agent_kind == *kind
                        && &d.model_id == model
                        && d.context == *context
                        && d.moa == *moa
                });
                match entry {
                    Some(d) => {
                        svg.rect(
                            x,
                            y,
                            CELL_W - 2.0,
                            CELL_H - 2.0,
                            &diverging_color(d.delta, -extent, extent),
                            "#999999",
                        );
                        svg.text(
                            x + CELL_W / 2.0 - 1.0,
                            y + CELL_H / 2.0 + 4.0,
                            11.0,
                            "middle",
                            &format!("{}{}", fmt2(d.delta), d.star),
                        );
                    }
                    None => svg.rect(x, y, CELL_W - 2.0, CELL_H - 2.0, "#f2f2f2", "#cccccc"),
                }
            }
        }
    }
    write_atomic(&out_dir.join("fig_delta_heatmap.svg"), svg.finish().as_bytes())
}

const KDE_PANEL_W: f64 = 170.0;
const KDE_PANEL_H: f64 = 120.0;

fn curve_points(curve: &Curve, x0: f64, y0: f64, w: f64, h: f64, y_max: f64) -> Vec<(f64, f64)> {
    let x_min = curve.xs.first().copied().unwrap_or(0.0);
    let x_max = curve.xs.last().copied().unwrap_or(1.0);
    curve
        .xs
        .iter()
        .zip(&curve.ys)
        .map(|(x, y)| {
            let px = x0 + (x - x_min) / (x_max - x_min).max(1e-9) * w;
            let py = y0 + h - (y / y_max).min(1.0) * h;
            (px, py)
        })
        .collect()
}

fn fig_kde_grid(
    out_dir: &Path,
    curves: &[Curve],
    cells: &[CellMetrics],
    models: &[String],
) -> Result<(), RunnerError> {
    let find = |label: &str| curves.iter().find(|c| c.label == label);
    let y_max = curves
        .iter()
        .filter(|c| !c.label.contains('@'))
        .flat_map(|c| c.ys.iter())
        .fold(1e-9f64, |a, b| a.max(*b));

    let width = 60.0 + 6.0 * (KDE_PANEL_W + 10.0);
    let height = 60.0 + 2.0 * (KDE_PANEL_H + 42.0);
    let mut svg = Svg::new(width, height);
    let colors = ["#d62728", "#1f77b4"];
    svg.text(60.0, 20.0, 12.0, "start", "guess densities: human pooled (black) vs agents");
    for (m_idx, model) in models.iter().enumerate() {
        svg.text(
            60.0 + 150.0 * m_idx as f64,
            36.0,
            11.0,
            "start",
            &format!("{model}: {}", colors[m_idx % colors.len()]),
        );
    }

    for (row_idx, kind) in [AgentKind::Simple, AgentKind::Reasoner].iter().enumerate() {
        let y0 = 52.0 + row_idx as f64 * (KDE_PANEL_H + 42.0);
        for (col, (context, moa)) in CM_ORDER.iter().enumerate() {
            let x0 = 60.0 + col as f64 * (KDE_PANEL_W + 10.0);
            svg.rect(x0, y0, KDE_PANEL_W, KDE_PANEL_H, "none", "#888888");
            let kind_label = if *kind == AgentKind::Simple { "simple" } else { "reasoner" };
            svg.text(
                x0 + KDE_PANEL_W / 2.0,
                y0 + KDE_PANEL_H + 14.0,
                10.0,
                "middle",
                &format!("{kind_label} {}", cm_label(*context, *moa)),
            );
            if let Some(human) = find("human_pooled") {
                svg.polyline(
                    &curve_points(human, x0, y0, KDE_PANEL_W, KDE_PANEL_H, y_max),
                    "#222222",
                    1.4,
                    None,
                );
            }
            for (cohort, dash) in [("human_student", "4,3"), ("human_expert", "2,2")] {
                if let Some(curve) = find(cohort) {
                    svg.polyline(
                        &curve_points(curve, x0, y0, KDE_PANEL_W, KDE_PANEL_H, y_max),
                        "#555555",
                        0.8,
                        Some(dash),
                    );
                }
            }
            for (m_idx, model) in models.iter().enumerate() {
                if let Some(cell) = find_cell(cells, *kind, Some(model), *context, *moa) {
                    if let Some(curve) = find(&cell.cell_id) {
                        svg.polyline(
                            &curve_points(curve, x0, y0, KDE_PANEL_W, KDE_PANEL_H, y_max),
                            colors[m_idx % colors.len()],
                            1.4,
                            None,
                        );
                    }
                }
            }
        }
    }
    write_atomic(&out_dir.join("fig_kde_grid.svg"), svg.finish().as_bytes())
}

fn fig_ewa(out_dir: &Path, curves: &[Curve]) -> Result<(), RunnerError> {
    let find = |label: &str| curves.iter().find(|c| c.label == label);
    let width = 520.0;
    let height = 300.0;
    let (x0, y0, w, h) = (60.0, 40.0, width - 90.0, height - 90.0);
    let mut svg = Svg::new(width, height);
    svg.text(x0, 24.0, 13.0, "start", "EWA one-shot guesses vs pooled humans");

    let y_max = ["human_pooled", "ewa"]
        .iter()
        .filter_map(|l| find(l))
        .flat_map(|c| c.ys.iter())
        .fold(1e-9f64, |a, b| a.max(*b));

    svg.rect(x0, y0, w, h, "none", "#888888");
    // k-level ladder gridlines at a_k = 50 * (2/3)^k.
    for k in 0..=6 {
        let a_k = 50.0 * (2.0f64 / 3.0).powi(k);
        let px = x0 + a_k / 100.0 * w;
        svg.line(px, y0, px, y0 + h, "#bbbbbb", 0.6);
        svg.text(px, y0 + h + 14.0, 9.0, "middle", &format!("k={k}"));
    }
    if let Some(curve) = find("human_pooled") {
        svg.polyline(&curve_points(curve, x0, y0, w, h, y_max), "#222222", 1.6, None);
        svg.text(x0 + w - 4.0, y0 + 14.0, 10.0, "end", "humans (black)");
    }
    if let Some(curve) = find("ewa") {
        svg.polyline(&curve_points(curve, x0, y0, w, h, y_max), "#2ca02c", 1.6, None);
        svg.text(x0 + w - 4.0, y0 + 28.0, 10.0, "end", "ewa (green)");
    }
    write_atomic(&out_dir.join("fig_ewa.svg"), svg.finish().as_bytes())
}

fn fig_validity_trend(
    out_dir: &Path,
    validity: &[ValidityRow],
    models: &[String],
) -> Result<(), RunnerError> {
    let width = 640.0;
    let height = 330.0;
    let (x0, y0, w, h) = (70.0, 50.0, width - 110.0, height - 110.0);
    let mut svg = Svg::new(width, height);
    svg.text(x0, 24.0, 13.0, "start", "valid-guess ratio under the shifted range");
    svg.rect(x0, y0, w, h, "none", "#888888");
    for tick in 0..=4 {
        let frac = tick as f64 / 4.0;
        let y = y0 + h - frac * h;
        svg.line(x0 - 3.0, y, x0, y, "#333333", 1.0);
        svg.text(x0 - 6.0, y + 3.0, 9.0, "end", &format!("{:.2}", frac));
    }
    let step = w / (CM_ORDER.len() as f64 - 1.0).max(1.0);
    for (idx, (context, moa)) in CM_ORDER.iter().enumerate() {
        let x = x0 + idx as f64 * step;
        svg.text(x, y0 + h + 16.0, 9.0, "middle", &cm_label(*context, *moa));
    }

    let palette = ["#d62728", "#1f77b4", "#ff9896", "#aec7e8"];
    let mut series_idx = 0usize;
    for kind in [AgentKind::Simple, AgentKind::Reasoner] {
        for model in models {
            let mut points = Vec::new();
            for (idx, (context, moa)) in CM_ORDER.iter().enumerate() {
                if let Some(row) = validity.iter().find(|v| {
                    v.agent_kind == kind
                        && &v.model_id == model
                        && v.context == *context
                        && v.moa == *moa
                }) {
                    points.push((x0 + idx as f64 * step, y0 + h - row.validity_ratio * h));
                }
            }
            if !points.is_empty() {
                let color = palette[series_idx % palette.len()];
                let dash = if kind == AgentKind::Reasoner { Some("5,3") } else { None };
                svg.polyline(&points, color, 1.6, dash);
                let kind_label = if kind == AgentKind::Simple { "simple" } else { "reasoner" };
                svg.text(
                    x0 + w + 6.0,
                    y0 + 12.0 + series_idx as f64 * 14.0,
                    9.0,
                    "start",
                    &format!("{kind_label}/{model}"),
                );
                svg.line(
                    x0 + w + 6.0,
                    y0 + 16.0 + series_idx as f64 * 14.0,
                    x0 + w + 30.0,
                    y0 + 16.0 + series_idx as f64 * 14.0,
                    color,
                    2.0,
                );
            }
            series_idx += 1;
        }
    }
    write_atomic(&out_dir.join("fig_validity_trend.svg"), svg.finish().as_bytes())
}

fn bounds(values: &[f64]) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for v in values {
        if v.is_finite() {
            min = min.min(*v);
            max = max.max(*v);
        }
    }
    if !min.is_finite() || !max.is_finite() {
        (0.0, 1.0)
    } else {
        (min, max)
    }
}
