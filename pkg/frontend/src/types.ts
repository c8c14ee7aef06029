// Wire types for the valleyfinder service JSON API.

export interface HistogramBinJson {
    lo_log2: number
    hi_log2: number
    count: number
    density: number
}

export interface HistogramJson {
    bin_width_log2: number
    n_total: number
    bins: HistogramBinJson[]
}

export interface ComponentJson {
    mu: number
    sigma: number
    lambda: number
    label: string | null
}

export interface FitJson {
    components: ComponentJson[]
    log_likelihood: number
    n: number
    iterations: number
    converged: boolean
    seed: number
    degenerate: boolean
}

export interface FitConfigJson {
    k: number
    max_iter: number
    rel_tol: number
    restarts: number
    seed: number
    sigma_floor: number
    init_strategy: string
}

export interface FilterSpecJson {
    min_delta_s?: number
    exclude_exact_deltas?: number[]
    exclude_users?: string[]
    max_events_per_user?: number | null
}

export interface CurvesJson {
    x: number[]
    components: number[][]
    total: number[]
}

export interface DbiJson {
    index: number
    per_cluster_dispersion: number[]
    centroid_distances: number[][]
    assignment_counts: number[]
}

export interface FitResponse {
    fit_id: string
    fit: FitJson
    config: FitConfigJson
    filters: Required<FilterSpecJson>
    bic: number
    dbi: DbiJson | null
    curves: CurvesJson
}

export interface ThresholdJson {
    t_log2: number
    threshold_s: number
    threshold_min: number
    within_group: number[]
    between_group: number[]
    bracket: [number, number]
}

export interface ValleyJson {
    found: boolean
    valley_log2: number | null
    valley_minutes: number | null
    peak_lo_log2: number | null
    peak_hi_log2: number | null
    smoothing_window_bins: number
}

export interface ThresholdResponse {
    threshold: ThresholdJson
    valley: ValleyJson
}

export interface FilterSummary {
    n_before: number
    n_after: number
    n_users: number
    removed: Record<string, number>
    filters: Required<FilterSpecJson>
}

export interface SpikeReportJson {
    delta_s: number
    count: number
    neighborhood_mean: number
    ratio: number
    share: number
    offending_users: string[]
}

export interface MetaResponse {
    samples_path: string
    workdir: string
    n_samples_total: number
    n_samples_filtered: number
    filters: Required<FilterSpecJson>
}

// Mirrors the CLI's PipelineConfig schema; `valleyfinder fit --config` replays it.
export interface PipelineConfigJson {
    input: {
        path: string
        format: 'csv' | 'tsv' | 'jsonl' | 'samples'
        columns: null
    }
    filters: FilterSpecJson
    fit_configs: FitConfigJson[]
    threshold_s: number | null
    out_dir: string
    bin_width_log2: number
}
