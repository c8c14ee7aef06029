import type { ViewState } from './state'
import type { FitResponse, MetaResponse, PipelineConfigJson } from './types'

/**
 * The accepted configuration, in the exact schema `valleyfinder fit --config`
 * replays. The service echoes back the effective FitConfig and FilterSpec it
 * fitted with, so the export reproduces the accepted fit byte-for-byte.
 */
export function buildPipelineConfig(
    view: ViewState,
    fit: FitResponse,
    meta: MetaResponse,
    outDir: string = '.',
): PipelineConfigJson {
    if (!view.accepted || view.activeFitId === null) {
        throw new Error('export requires an accepted fit')
    }
    if (view.activeFitId !== fit.fit_id) {
        throw new Error(`active fit ${view.activeFitId} does not match response ${fit.fit_id}`)
    }
    return {
        input: { path: meta.samples_path, format: 'samples', columns: null },
        filters: fit.filters,
        fit_configs: [fit.config],
        threshold_s: null,
        out_dir: outDir,
        bin_width_log2: view.binWidth,
    }
}

export function downloadConfig(config: PipelineConfigJson, filename = 'valleyfinder-config.json'): void {
    const blob = new Blob([JSON.stringify(config, null, 2) + '\n'], { type: 'application/json' })
    const url = URL.createObjectURL(blob)
    const anchor = document.createElement('a')
    anchor.href = url
    anchor.download = filename
    anchor.click()
    URL.revokeObjectURL(url)
}
