/**
 * Correlation explorer: PCC heat-map with per-pair drill-down.
 *
 * The heat-map and the coefficient shown for a picked pair come straight
 * from GET /datasets/{id}/stats. Clicking an off-diagonal cell shows the
 * two variables' ECDF curves overlaid (service payloads), their KDE
 * curves when available, and a scatter of the raw uploaded rows when the
 * CSV was uploaded in this session.
 */
import type { ApiClient } from "../api.js";
import { renderEcdfOverlay, renderHeatmap, renderKde, renderScatter } from "../charts.js";
import { pairPoints } from "../csv.js";
import { clear, h } from "../dom.js";
import { fmt3 } from "../format.js";
import type { SessionState } from "../state.js";
import type { StatsPayload } from "../types.js";

export interface CorrelationsDeps {
  api: ApiClient;
  state: SessionState;
  /** per-variable columns of the locally uploaded CSV, if any */
  localColumns?: Record<string, number[]> | null;
}

export interface CorrelationsView {
  load(): Promise<void>;
}

export function renderCorrelations(
  container: HTMLElement,
  deps: CorrelationsDeps,
): CorrelationsView {
  async function load(): Promise<void> {
    clear(container);
    container.append(h("h2", {}, ["Correlations"]));
    const datasetId = deps.state.datasetId;
    if (!datasetId) {
      container.append(h("p", { class: "empty-note" }, ["Upload a dataset to see its correlation structure."]));
      return;
    }
    let stats: StatsPayload;
    try {
      stats = await deps.api.datasetStats(datasetId);
    } catch (error) {
      const message = error instanceof Error ? error.message : String(error);
      const retry = h("button", { class: "retry" }, ["Retry"]);
      retry.addEventListener("click", () => void load());
      container.append(
        h("p", { class: "error-note" }, [`Statistics are not available yet: ${message}`]),
        retry,
      );
      return;
    }
    const detail = h("div", { class: "pair-detail" });
    const picked = (a: string, b: string): void => {
      clear(detail);
      const names = stats.correlation.names;
      const row = stats.correlation.matrix[names.indexOf(a)] as (number | null)[];
      const value = row[names.indexOf(b)] ?? null;
      detail.append(
        h("h3", {}, [`${a} vs ${b}`]),
        h("p", { class: "pcc-value", "data-pair": `${a}|${b}` }, [
          value === null ? `PCC(${a}, ${b}) is undefined (constant column)` : `PCC(${a}, ${b}) = ${fmt3(value)}`,
        ]),
      );
      const curveA = stats.distributions[a];
      const curveB = stats.distributions[b];
      if (curveA && curveB) {
        detail.append(
          h("h4", {}, ["ECDF overlay"]),
          renderEcdfOverlay([
            { label: a, curve: curveA.ecdf, color: "#1668aa" },
            { label: b, curve: curveB.ecdf, color: "#c4501e" },
          ]),
        );
        const kdes = h("div", { class: "kde-row" });
        for (const [name, dist] of [
          [a, curveA],
          [b, curveB],
        ] as const) {
          if (dist.kde !== null) {
            kdes.append(
              h("figure", {}, [renderKde(dist.kde, "#4a7b3f"), h("figcaption", {}, [`KDE of ${name}`])]),
            );
          }
        }
        detail.append(kdes);
      }
      const columns = deps.localColumns;
      if (columns && columns[a] && columns[b]) {
        detail.append(
          h("h4", {}, ["Scatter (uploaded rows)"]),
          renderScatter([{ label: `${a} vs ${b}`, points: pairPoints(columns, a, b), color: "#1668aa" }]),
        );
      } else {
        detail.append(
          h("p", { class: "empty-note" }, [
            "Scatter shows the raw rows; upload the CSV in this session to enable it.",
          ]),
        );
      }
    };
    container.append(renderHeatmap(stats.correlation, picked));
    if (stats.correlation.correlated_pairs.length > 0) {
      const list = h("ul", { class: "correlated-pairs" });
      for (const [a, b, r] of stats.correlation.correlated_pairs) {
        list.append(h("li", {}, [`${a} and ${b}: ${fmt3(r)}`]));
      }
      container.append(
        h("p", {}, [`Pairs above the |r| >= ${stats.correlation.threshold} screen:`]),
        list,
      );
    }
    container.append(detail);
  }

  return { load };
}
