import { ApiClient, ApiError } from './api'
import { COMPONENT_COLORS, FitChart } from './chart'
import { buildPipelineConfig, downloadConfig } from './export'
import {
    MAX_K,
    MIN_K,
    ViewState,
    initialViewState,
    toggleComponent,
    withAccepted,
    withActiveFit,
    withChosenK,
    withFilterDraft,
} from './state'
import type { FilterSpecJson, FitResponse, HistogramJson, MetaResponse, ThresholdResponse } from './types'

function button(label: string, onClick: () => void): HTMLButtonElement {
    const b = document.createElement('button')
    b.textContent = label
    b.addEventListener('click', onClick)
    return b
}

function labeled(text: string, input: HTMLElement): HTMLLabelElement {
    const wrap = document.createElement('label')
    const span = document.createElement('span')
    span.textContent = text
    wrap.appendChild(span)
    wrap.appendChild(input)
    return wrap
}

export class InspectorApp {
    readonly root: HTMLElement
    view: ViewState = initialViewState()
    lastFit: FitResponse | null = null
    lastThreshold: ThresholdResponse | null = null
    histogram: HistogramJson | null = null
    meta: MetaResponse | null = null

    private readonly chart = new FitChart()
    private readonly banner = document.createElement('div')
    private readonly stats = document.createElement('div')
    private readonly toggles = document.createElement('div')
    private readonly kSelect = document.createElement('select')
    private readonly seedInput = document.createElement('input')
    private readonly minDeltaInput = document.createElement('input')
    private readonly excludeDeltasInput = document.createElement('input')
    private readonly refitButton: HTMLButtonElement
    private readonly acceptButton: HTMLButtonElement
    private readonly exportButton: HTMLButtonElement
    private refitting = false

    constructor(
        root: HTMLElement,
        private readonly api: ApiClient,
    ) {
        this.root = root
        this.banner.className = 'banner'
        this.banner.hidden = true
        this.stats.className = 'stats'
        this.toggles.className = 'toggles'

        for (let k = MIN_K; k <= MAX_K; k++) {
            const opt = document.createElement('option')
            opt.value = String(k)
            opt.textContent = `k = ${k}`
            this.kSelect.appendChild(opt)
        }
        this.kSelect.addEventListener('change', () => {
            this.view = withChosenK(this.view, Number(this.kSelect.value))
        })

        this.seedInput.type = 'number'
        this.seedInput.value = '0'
        this.minDeltaInput.type = 'number'
        this.minDeltaInput.placeholder = '0'
        this.excludeDeltasInput.type = 'text'
        this.excludeDeltasInput.placeholder = 'e.g. 1080'

        this.refitButton = button('Fit', () => void this.refit())
        this.acceptButton = button('Accept fit', () => this.accept())
        this.exportButton = button('Export config', () => this.exportConfig())

        const controls = document.createElement('div')
        controls.className = 'controls'
        controls.appendChild(labeled('components', this.kSelect))
        controls.appendChild(labeled('seed', this.seedInput))
        controls.appendChild(labeled('min gap (s)', this.minDeltaInput))
        controls.appendChild(labeled('drop exact gaps (s)', this.excludeDeltasInput))
        controls.appendChild(this.refitButton)
        controls.appendChild(this.acceptButton)
        controls.appendChild(this.exportButton)

        this.root.appendChild(this.banner)
        this.root.appendChild(controls)
        this.root.appendChild(this.stats)
        this.root.appendChild(this.toggles)
        this.root.appendChild(this.chart.root)
        this.render()
    }

    async load(): Promise<void> {
        try {
            this.meta = await this.api.meta()
            this.histogram = await this.api.histogram(this.view.binWidth)
            this.clearBanner()
        } catch (err) {
            // unreachable service: show the failure, render nothing stale
            this.histogram = null
            this.showBanner(err)
        }
        this.render()
    }

    filterDraftFromControls(): FilterSpecJson {
        const draft: FilterSpecJson = {}
        const minDelta = Number(this.minDeltaInput.value)
        if (this.minDeltaInput.value !== '' && Number.isFinite(minDelta) && minDelta > 0) {
            draft.min_delta_s = minDelta
        }
        const excluded = this.excludeDeltasInput.value
            .split(',')
            .map((s) => Number(s.trim()))
            .filter((v) => Number.isInteger(v) && v >= 1)
        if (excluded.length) draft.exclude_exact_deltas = excluded
        return draft
    }

    async refit(): Promise<void> {
        if (this.refitting) return
        this.refitting = true
        try {
            this.view = withFilterDraft(this.view, this.filterDraftFromControls())
            const seed = Number(this.seedInput.value) || 0
            const fit = await this.api.fit(this.view.chosenK, seed, this.view.filterDraft)
            const threshold = await this.api.threshold(fit.fit_id)
            const histogram = await this.api.histogram(this.view.binWidth)
            this.lastFit = fit
            this.lastThreshold = threshold
            this.histogram = histogram
            this.view = withActiveFit(this.view, fit.fit_id)
            this.clearBanner()
        } catch (err) {
            this.showBanner(err) // keep the prior fit on screen
        } finally {
            this.refitting = false
        }
        this.render()
    }

    accept(): void {
        if (this.lastFit === null) {
            this.showBanner(new Error('nothing to accept; run a fit first'))
            return
        }
        this.view = withAccepted(this.view)
        this.render()
    }

    exportConfig(): void {
        if (!this.view.accepted || this.lastFit === null || this.meta === null) return
        downloadConfig(buildPipelineConfig(this.view, this.lastFit, this.meta))
    }

    showBanner(err: unknown): void {
        const text =
            err instanceof ApiError
                ? `${err.code}: ${err.message}`
                : err instanceof Error
                  ? err.message
                  : String(err)
        this.banner.textContent = text
        this.banner.hidden = false
    }

    clearBanner(): void {
        this.banner.hidden = true
        this.banner.textContent = ''
    }

    render(): void {
        this.exportButton.disabled = !this.view.accepted
        this.acceptButton.disabled = this.lastFit === null

        if (this.lastFit) {
            const fit = this.lastFit
            const dbi = fit.dbi ? fit.dbi.index.toFixed(3) : 'n/a'
            const convergence = fit.fit.converged ? 'converged' : 'NOT CONVERGED'
            const degenerate = fit.fit.degenerate ? ', degenerate' : ''
            this.stats.textContent =
                `k=${fit.config.k} seed=${fit.config.seed} | BIC ${fit.bic.toFixed(1)} | DBI ${dbi} | ` +
                `${convergence}${degenerate} after ${fit.fit.iterations} iterations` +
                (this.view.accepted ? ' | ACCEPTED' : '')
        } else {
            this.stats.textContent = this.histogram
                ? `${this.histogram.n_total} samples loaded; choose k and fit`
                : ''
        }

        this.renderToggles()
        if (this.histogram) {
            this.chart.render(
                {
                    histogram: this.histogram,
                    curves: this.lastFit?.curves ?? null,
                    threshold: this.lastThreshold?.threshold ?? null,
                },
                this.view,
            )
        } else {
            this.chart.root.textContent = ''
        }
    }

    private renderToggles(): void {
        this.toggles.textContent = ''
        if (!this.lastFit) return
        this.lastFit.fit.components.forEach((comp, index) => {
            const box = document.createElement('input')
            box.type = 'checkbox'
            box.checked = !this.view.hiddenComponents.includes(index)
            box.addEventListener('change', () => {
                this.view = toggleComponent(this.view, index)
                this.render()
            })
            const label = labeled(`${comp.label ?? `component ${index}`}`, box)
            label.style.color = COMPONENT_COLORS[index % COMPONENT_COLORS.length]
            this.toggles.appendChild(label)
        })
    }
}
