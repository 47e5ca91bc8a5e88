/** Application shell: filter panel, tabs, fetch orchestration, URL sync.
 *
 * All rendering goes through the pure functions in render/; this module
 * owns the DOM, the fetch lifecycle (a new query aborts the in-flight
 * one so a stale response can never overwrite newer filter state), and
 * the URL round-trip.
 */
import { api, ApiError, ElementRefWire, MetaPayload } from "./api.js";
import { escapeHtml } from "./format.js";
import { renderBreakdown } from "./render/breakdown.js";
import { renderDetailsDrawer } from "./render/details.js";
import { renderModelMetrics } from "./render/metrics.js";
import { renderDataQuality } from "./render/quality.js";
import { renderErrorState, renderLoadingState } from "./render/states.js";
import {
  DEFAULT_STATE,
  encodeState,
  FilterPanelState,
  isBlankUrl,
  parseState,
  stateFromDefaults,
  Tab,
  toQuerySpec,
} from "./state.js";

const TABS: [Tab, string][] = [
  ["metrics", "Model Metrics"],
  ["quality", "Data Quality"],
  ["breakdown", "Prediction Breakdown"],
];

let meta: MetaPayload | null = null;
let state: FilterPanelState = { ...DEFAULT_STATE };
let inflight: AbortController | null = null;
let drawerElement: ElementRefWire | null = null;
let drawerPage = 0;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function checkboxGroup(
  name: string, options: string[], selected: string[], labelOf?: (v: string) => string,
): string {
  return options
    .map((value) => {
      const checked = selected.includes(value) ? " checked" : "";
      return `<label class="check"><input type="checkbox" name="${name}" ` +
        `value="${escapeHtml(value)}"${checked}/> ${escapeHtml(labelOf ? labelOf(value) : value)}</label>`;
    })
    .join("");
}

function renderFilterPanel(): void {
  if (!meta) return;
  const models = meta.engines.filter((e) => e.kind === "InternalModel");
  const vendors = meta.engines.filter((e) => e.kind !== "InternalModel");
  const modelTypes = [...new Set(models.map((e) => e.model_type ?? "Other"))];
  const panel = el("filter-panel");
  panel.innerHTML = `
    <h2>Filters</h2>
    <fieldset><legend>Source of data feed</legend>
      ${checkboxGroup("feeds", meta.sources, state.sourceFeeds)}
      <p class="hint">none checked = all feeds</p>
    </fieldset>
    <fieldset><legend>Time frame</legend>
      <label>from <input type="date" id="f-from" value="${state.timeFrom}"/></label>
      <label>to <input type="date" id="f-to" value="${state.timeTo}"/></label>
    </fieldset>
    <fieldset><legend>Model type</legend>
      <select id="f-type">${modelTypes.map((t) =>
        `<option value="${escapeHtml(t)}"${t === state.modelType ? " selected" : ""}>${escapeHtml(t)}</option>`).join("")}
      </select>
    </fieldset>
    <fieldset><legend>Model versions</legend>
      ${checkboxGroup("models", models.map((m) => m.engine_id), state.modelVersions)}
    </fieldset>
    <fieldset><legend>Vendors</legend>
      ${checkboxGroup("vendors", vendors.map((v) => v.engine_id), state.vendorIds)}
    </fieldset>
    <details id="advanced"${state.advancedOpen ? " open" : ""}><summary>Advanced filters</summary>
      <fieldset><legend>Model threshold</legend>
        <input type="range" id="f-thr" min="0" max="1" step="0.01"
          value="${state.threshold ?? ""}"/>
        <span id="f-thr-value">${state.threshold === null ? "model default" : state.threshold}</span>
        <button id="f-thr-clear" type="button">use default</button>
      </fieldset>
      <fieldset><legend>Types of files</legend>
        <input type="text" id="f-files" placeholder="comma-separated; empty = all"
          value="${escapeHtml(state.fileTypesInclude.join(","))}"/>
      </fieldset>
      <fieldset><legend>Equalize data coverage</legend>
        <label class="check"><input type="checkbox" id="f-scored"${state.scoredByModelOnly ? " checked" : ""}/>
          only data scored by our model</label>
        <label>% of engines that observed the data
          <input type="range" id="f-cov" min="0" max="100" step="1" value="${state.minCoveragePct}"/>
          <span id="f-cov-value">${state.minCoveragePct}%</span>
        </label>
      </fieldset>
    </details>
    <button id="f-apply">Apply</button>`;

  panel.querySelectorAll<HTMLInputElement>("input[type=checkbox][name]").forEach((box) => {
    box.addEventListener("change", () => {
      const picked = (name: string) =>
        [...panel.querySelectorAll<HTMLInputElement>(`input[name=${name}]:checked`)]
          .map((b) => b.value);
      state.sourceFeeds = picked("feeds");
      state.modelVersions = picked("models");
      state.vendorIds = picked("vendors");
    });
  });
  el<HTMLInputElement>("f-from").addEventListener("change", (e) => {
    state.timeFrom = (e.target as HTMLInputElement).value;
  });
  el<HTMLInputElement>("f-to").addEventListener("change", (e) => {
    state.timeTo = (e.target as HTMLInputElement).value;
  });
  el<HTMLSelectElement>("f-type").addEventListener("change", (e) => {
    state.modelType = (e.target as HTMLSelectElement).value;
  });
  el("advanced").addEventListener("toggle", () => {
    state.advancedOpen = (el("advanced") as HTMLDetailsElement).open;
  });
  const thrValue = el("f-thr-value");
  el<HTMLInputElement>("f-thr").addEventListener("input", (e) => {
    state.threshold = Number((e.target as HTMLInputElement).value);
    thrValue.textContent = String(state.threshold);
    scheduleQuery(); // threshold slider re-queries immediately
  });
  el("f-thr-clear").addEventListener("click", () => {
    state.threshold = null;
    thrValue.textContent = "model default";
    scheduleQuery();
  });
  el<HTMLInputElement>("f-files").addEventListener("change", (e) => {
    const raw = (e.target as HTMLInputElement).value;
    state.fileTypesInclude = raw.split(",").map((s) => s.trim()).filter(Boolean);
  });
  el<HTMLInputElement>("f-scored").addEventListener("change", (e) => {
    state.scoredByModelOnly = (e.target as HTMLInputElement).checked;
  });
  el<HTMLInputElement>("f-cov").addEventListener("input", (e) => {
    state.minCoveragePct = Number((e.target as HTMLInputElement).value);
    el("f-cov-value").textContent = `${state.minCoveragePct}%`;
  });
  el("f-apply").addEventListener("click", () => scheduleQuery());
}

function renderTabs(): void {
  el("tabs").innerHTML = TABS
    .map(([tab, title]) =>
      `<button class="tab${tab === state.tab ? " active" : ""}" data-tab="${tab}">${title}</button>`)
    .join("");
  el("tabs").querySelectorAll<HTMLButtonElement>("button").forEach((btn) => {
    btn.addEventListener("click", () => {
      state.tab = btn.dataset.tab as Tab;
      renderTabs();
      scheduleQuery();
    });
  });
}

function syncUrl(): void {
  history.replaceState(null, "", `?${encodeState(state)}`);
}

let queryTimer: number | undefined;

function scheduleQuery(): void {
  clearTimeout(queryTimer);
  queryTimer = window.setTimeout(() => void runQuery(), 120);
}

async function runQuery(): Promise<void> {
  syncUrl();
  inflight?.abort();
  const controller = new AbortController();
  inflight = controller;
  const body = el("tab-content");
  body.innerHTML = renderLoadingState();
  const query = toQuerySpec(state);
  try {
    if (state.tab === "metrics") {
      const payload = await api.metrics(query, controller.signal);
      body.innerHTML = renderModelMetrics(payload);
      wireDetailClicks();
    } else if (state.tab === "quality") {
      const payload = await api.quality(query, controller.signal);
      body.innerHTML = renderDataQuality(payload);
    } else {
      const payload = await api.breakdown(query, {
        group_by: state.groupBy,
        substring: state.substring || null,
        sort_key: state.sortKey,
        descending: state.descending,
      }, controller.signal);
      body.innerHTML =
        `<div class="table-mode">` +
        `<label class="check"><input type="radio" name="groupby" value="family"` +
        `${state.groupBy === "family" ? " checked" : ""}/> by malware family</label>` +
        `<label class="check"><input type="radio" name="groupby" value="filetype"` +
        `${state.groupBy === "filetype" ? " checked" : ""}/> by file type</label>` +
        `</div>` +
        renderBreakdown(payload, {
          sortKey: state.sortKey, descending: state.descending, substring: state.substring,
        });
      wireBreakdownControls();
    }
  } catch (error) {
    if (controller.signal.aborted) return; // superseded by a newer query
    const apiError = error instanceof ApiError ? error : null;
    body.innerHTML = renderErrorState(
      apiError?.message ?? String(error), apiError?.violations ?? []);
  }
}

function wireBreakdownControls(): void {
  const body = el("tab-content");
  body.querySelectorAll<HTMLInputElement>("input[name=groupby]").forEach((radio) => {
    radio.addEventListener("change", () => {
      state.groupBy = radio.value as "family" | "filetype";
      scheduleQuery();
    });
  });
  const contains = body.querySelector<HTMLInputElement>("#breakdown-contains");
  contains?.addEventListener("change", () => {
    state.substring = contains.value;
    scheduleQuery();
  });
  body.querySelectorAll<HTMLButtonElement>(".sort-btn").forEach((btn) => {
    btn.addEventListener("click", () => {
      const key = btn.dataset.sort as string;
      state.descending = state.sortKey === key ? !state.descending : true;
      state.sortKey = key;
      scheduleQuery();
    });
  });
  body.querySelectorAll<HTMLTableRowElement>(".breakdown-row").forEach((row) => {
    row.addEventListener("click", () => {
      openDrawer({
        group_by: state.groupBy,
        group_key: row.dataset.group as string,
      });
    });
  });
}

function wireDetailClicks(): void {
  el("tab-content").querySelectorAll<HTMLElement>(".cell-click").forEach((cell) => {
    cell.addEventListener("click", () => {
      openDrawer({ engine_id: cell.dataset.engine, metric: cell.dataset.metric });
    });
  });
}

async function openDrawer(element: ElementRefWire, page = 0): Promise<void> {
  drawerElement = element;
  drawerPage = page;
  const drawer = el("drawer");
  drawer.classList.add("open");
  drawer.innerHTML = renderLoadingState();
  try {
    const payload = await api.details(toQuerySpec(state), element, page, 50);
    drawer.innerHTML = renderDetailsDrawer(payload, element);
    el("details-close").addEventListener("click", () => drawer.classList.remove("open"));
    el<HTMLButtonElement>("details-prev").addEventListener("click", () =>
      void openDrawer(element, drawerPage - 1));
    el<HTMLButtonElement>("details-next").addEventListener("click", () =>
      void openDrawer(element, drawerPage + 1));
    el("details-csv").addEventListener("click", () => void downloadCsv());
  } catch (error) {
    const apiError = error instanceof ApiError ? error : null;
    drawer.innerHTML = renderErrorState(
      apiError?.message ?? String(error), apiError?.violations ?? []);
  }
}

async function downloadCsv(): Promise<void> {
  if (!drawerElement) return;
  const response = await fetch("/api/v1/query/details/export.csv", {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: api.exportCsvBody(toQuerySpec(state), drawerElement),
  });
  const blob = await response.blob();
  const link = document.createElement("a");
  link.href = URL.createObjectURL(blob);
  link.download = "details.csv";
  link.click();
  URL.revokeObjectURL(link.href);
}

async function boot(): Promise<void> {
  try {
    meta = await api.meta();
  } catch (error) {
    el("tab-content").innerHTML = renderErrorState(String(error));
    return;
  }
  if (isBlankUrl(location.search) && meta.defaults) {
    // first load: latest deployed model over the last two weeks
    state = stateFromDefaults(meta.defaults);
  } else {
    state = parseState(location.search);
  }
  renderFilterPanel();
  renderTabs();
  await runQuery();
}

void boot();
