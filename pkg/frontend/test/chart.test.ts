// @vitest-environment jsdom
import { describe, expect, it } from 'vitest'

import { FitChart } from '../src/chart'
import { initialViewState, toggleComponent, withActiveFit } from '../src/state'
import { makeFitResponse, makeHistogram, makeThreshold } from './fixtures'

function renderChart(k: number, view = initialViewState()) {
    const chart = new FitChart()
    const fit = makeFitResponse(k)
    chart.render({ histogram: makeHistogram(), curves: fit.curves, threshold: makeThreshold() }, view)
    return chart.root
}

describe('FitChart', () => {
    it.each([2, 3, 4])('renders exactly k+1 curves and one threshold line for k=%d', (k) => {
        const root = renderChart(k)
        expect(root.querySelectorAll('path.curve').length).toBe(k + 1)
        expect(root.querySelectorAll('path.component-curve').length).toBe(k)
        expect(root.querySelectorAll('path.total-curve').length).toBe(1)
        expect(root.querySelectorAll('line.threshold-line').length).toBe(1)
    })

    it('labels the threshold in minutes', () => {
        const root = renderChart(2)
        const label = root.querySelector('text.threshold-label')
        expect(label?.textContent).toBe('17.1 min') // 2^10 s = 1024 s
    })

    it('draws one bar per histogram bin', () => {
        const hist = makeHistogram()
        const chart = new FitChart()
        chart.render({ histogram: hist, curves: null, threshold: null }, initialViewState())
        expect(chart.root.querySelectorAll('rect.hist-bar').length).toBe(hist.bins.length)
        expect(chart.root.querySelectorAll('path.curve').length).toBe(0)
        expect(chart.root.querySelectorAll('line.threshold-line').length).toBe(0)
    })

    it('hides exactly the toggled component curve', () => {
        const view = toggleComponent(withActiveFit(initialViewState(), 'x'), 1)
        const root = renderChart(3, view)
        const curves = [...root.querySelectorAll('path.component-curve')]
        expect(curves.length).toBe(3)
        const hidden = curves.filter((c) => c.getAttribute('display') === 'none')
        expect(hidden.length).toBe(1)
        expect(hidden[0].getAttribute('data-component-index')).toBe('1')
        expect(root.querySelectorAll('path.total-curve')[0].getAttribute('display')).toBeNull()
    })

    it('labels the axis with humanized durations', () => {
        const root = renderChart(2)
        const labels = [...root.querySelectorAll('text.axis-label')].map((t) => t.textContent)
        expect(labels).toContain('1 min')
        expect(labels).toContain('1 hour')
        expect(labels).toContain('1 day')
    })

    it('is a pure function of data and view', () => {
        const a = renderChart(3).innerHTML
        const b = renderChart(3).innerHTML
        expect(a).toBe(b)
    })

    it('renders empty data without crashing', () => {
        const chart = new FitChart()
        chart.render(
            { histogram: { bin_width_log2: 0.25, n_total: 0, bins: [] }, curves: null, threshold: null },
            initialViewState(),
        )
        expect(chart.root.querySelectorAll('rect.hist-bar').length).toBe(0)
    })
})
