import type {
    FitResponse,
    HistogramJson,
    MetaResponse,
    ThresholdJson,
    ThresholdResponse,
} from '../src/types'

export function makeHistogram(): HistogramJson {
    const bins = []
    const width = 0.25
    const n = 72  // spans 0..18 log2-seconds, past the 1-day tick
    for (let i = 0; i < n; i++) {
        bins.push({
            lo_log2: i * width,
            hi_log2: (i + 1) * width,
            count: 10,
            density: 1 / (n * width),
        })
    }
    return { bin_width_log2: width, n_total: n * 10, bins }
}

export function makeFitResponse(k: number, fitId = `fit-${k}`): FitResponse {
    const labels = ['short_within', 'within', 'between', 'break'].slice(4 - k < 0 ? 0 : 0, k)
    const components = []
    for (let i = 0; i < k; i++) {
        components.push({ mu: 4 + i * 5, sigma: 1.5, lambda: 1 / k, label: labels[i] ?? null })
    }
    const gridN = 512
    const x = Array.from({ length: gridN }, (_, i) => (16 * i) / (gridN - 1))
    const componentCurves = components.map((c) =>
        x.map((xv) => (c.lambda / (c.sigma * Math.sqrt(2 * Math.PI))) * Math.exp(-0.5 * ((xv - c.mu) / c.sigma) ** 2)),
    )
    const total = x.map((_, i) => componentCurves.reduce((acc, series) => acc + series[i], 0))
    return {
        fit_id: fitId,
        fit: {
            components,
            log_likelihood: -1234.5,
            n: 640,
            iterations: 17,
            converged: true,
            seed: 5,
            degenerate: false,
        },
        config: {
            k,
            max_iter: 1000,
            rel_tol: 1e-8,
            restarts: 10,
            seed: 5,
            sigma_floor: 0.001,
            init_strategy: 'quantile',
        },
        filters: {
            min_delta_s: 0,
            exclude_exact_deltas: [],
            exclude_users: [],
            max_events_per_user: null,
        },
        bic: 2500.0,
        dbi: {
            index: 0.42,
            per_cluster_dispersion: [1, 1],
            centroid_distances: [
                [0, 9],
                [9, 0],
            ],
            assignment_counts: [320, 320],
        },
        curves: { x, components: componentCurves, total },
    }
}

export function makeThreshold(tLog2 = 10.0): ThresholdJson {
    const thresholdS = 2 ** tLog2
    return {
        t_log2: tLog2,
        threshold_s: thresholdS,
        threshold_min: thresholdS / 60,
        within_group: [0],
        between_group: [1],
        bracket: [5, 15],
    }
}

export function makeThresholdResponse(tLog2 = 10.0): ThresholdResponse {
    return {
        threshold: makeThreshold(tLog2),
        valley: {
            found: true,
            valley_log2: 11.2,
            valley_minutes: 2 ** 11.2 / 60,
            peak_lo_log2: 6.5,
            peak_hi_log2: 16.2,
            smoothing_window_bins: 5,
        },
    }
}

export function makeMeta(): MetaResponse {
    return {
        samples_path: '/tmp/work/samples.jsonl',
        workdir: '/tmp/work',
        n_samples_total: 640,
        n_samples_filtered: 640,
        filters: { min_delta_s: 0, exclude_exact_deltas: [], exclude_users: [], max_events_per_user: null },
    }
}
