import type {
    FilterSpecJson,
    FilterSummary,
    FitResponse,
    HistogramJson,
    MetaResponse,
    SpikeReportJson,
    ThresholdResponse,
} from './types'

export class ApiError extends Error {
    constructor(
        public readonly status: number,
        public readonly code: string,
        message: string,
    ) {
        super(message)
        this.name = 'ApiError'
    }
}

async function asJson<T>(resp: Response): Promise<T> {
    if (resp.ok) return (await resp.json()) as T
    let code = `http_${resp.status}`
    let message = resp.statusText || `request failed with ${resp.status}`
    try {
        const body = (await resp.json()) as { code?: string; message?: string }
        if (body.code) code = body.code
        if (body.message) message = body.message
    } catch {
        // non-JSON error body; keep the status text
    }
    throw new ApiError(resp.status, code, message)
}

export class ApiClient {
    constructor(private readonly baseUrl: string = '') {}

    private url(path: string): string {
        return `${this.baseUrl}${path}`
    }

    async histogram(binWidth?: number): Promise<HistogramJson> {
        const query = binWidth !== undefined ? `?bin_width=${encodeURIComponent(binWidth)}` : ''
        return asJson(await fetch(this.url(`/api/histogram${query}`)))
    }

    async fit(k: number, seed: number, filters?: FilterSpecJson): Promise<FitResponse> {
        const body: Record<string, unknown> = { k, seed }
        if (filters !== undefined) body.filters = filters
        return asJson(
            await fetch(this.url('/api/fit'), {
                method: 'POST',
                headers: { 'Content-Type': 'application/json' },
                body: JSON.stringify(body),
            }),
        )
    }

    async threshold(fitId: string): Promise<ThresholdResponse> {
        return asJson(await fetch(this.url(`/api/threshold?fit_id=${encodeURIComponent(fitId)}`)))
    }

    async setFilters(filters: FilterSpecJson): Promise<FilterSummary> {
        return asJson(
            await fetch(this.url('/api/filters'), {
                method: 'POST',
                headers: { 'Content-Type': 'application/json' },
                body: JSON.stringify(filters),
            }),
        )
    }

    async spikes(): Promise<SpikeReportJson[]> {
        return asJson(await fetch(this.url('/api/spikes')))
    }

    async meta(): Promise<MetaResponse> {
        return asJson(await fetch(this.url('/api/meta')))
    }
}
