import { LinearScale, formatMinutes, ticksWithin } from './scale'
import type { ViewState } from './state'
import type { CurvesJson, HistogramJson, ThresholdJson } from './types'

const SVG_NS = 'http://www.w3.org/2000/svg'

export const COMPONENT_COLORS = ['#2563eb', '#d97706', '#059669', '#9333ea']
const TOTAL_COLOR = '#dc2626'
const THRESHOLD_COLOR = '#111827'

export interface ChartData {
    histogram: HistogramJson
    curves: CurvesJson | null
    threshold: ThresholdJson | null
}

interface Layout {
    width: number
    height: number
    margin: { top: number; right: number; bottom: number; left: number }
}

const LAYOUT: Layout = {
    width: 860,
    height: 420,
    margin: { top: 16, right: 20, bottom: 48, left: 52 },
}

function el<K extends string>(name: K, attrs: Record<string, string | number>): SVGElement {
    const node = document.createElementNS(SVG_NS, name) as SVGElement
    for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, String(value))
    return node
}

/**
 * Renders the histogram bars, one density curve per mixture component plus
 * the total, and the vertical threshold line. A plain function of
 * (data, view): rendering twice with equal inputs produces identical markup.
 */
export class FitChart {
    readonly root: HTMLDivElement

    constructor() {
        this.root = document.createElement('div')
        this.root.className = 'fit-chart'
    }

    render(data: ChartData, view: ViewState): void {
        this.root.textContent = ''
        const { width, height, margin } = LAYOUT
        const svg = el('svg', {
            viewBox: `0 0 ${width} ${height}`,
            width,
            height,
            role: 'img',
        })

        const bins = data.histogram.bins
        const xs: number[] = []
        for (const b of bins) xs.push(b.lo_log2, b.hi_log2)
        if (data.curves) xs.push(...data.curves.x)
        if (data.threshold) xs.push(data.threshold.t_log2)
        if (!xs.length) {
            this.root.appendChild(svg)
            return
        }
        const xLo = Math.min(...xs)
        const xHi = Math.max(...xs)

        let yHi = 0
        for (const b of bins) yHi = Math.max(yHi, b.density)
        if (data.curves) {
            for (const series of [...data.curves.components, data.curves.total]) {
                for (const v of series) yHi = Math.max(yHi, v)
            }
        }
        if (yHi === 0) yHi = 1

        const x = new LinearScale(xLo, xHi, margin.left, width - margin.right)
        const y = new LinearScale(0, yHi * 1.05, height - margin.bottom, margin.top)
        const floor = height - margin.bottom

        // histogram bars
        for (const b of bins) {
            const x0 = x.apply(b.lo_log2)
            const x1 = x.apply(b.hi_log2)
            const top = y.apply(b.density)
            svg.appendChild(
                el('rect', {
                    class: 'hist-bar',
                    x: x0,
                    y: top,
                    width: Math.max(x1 - x0 - 0.5, 0.5),
                    height: Math.max(floor - top, 0),
                    fill: '#cbd5e1',
                }),
            )
        }

        // axis ticks with humanized duration labels
        for (const tick of ticksWithin(xLo, xHi)) {
            const tx = x.apply(tick.log2)
            svg.appendChild(
                el('line', { class: 'axis-tick', x1: tx, x2: tx, y1: floor, y2: floor + 6, stroke: '#64748b' }),
            )
            const label = el('text', {
                class: 'axis-label',
                x: tx,
                y: floor + 20,
                'text-anchor': 'middle',
                'font-size': 11,
                fill: '#334155',
            })
            label.textContent = tick.label
            svg.appendChild(label)
            const logLabel = el('text', {
                class: 'axis-label-log2',
                x: tx,
                y: floor + 34,
                'text-anchor': 'middle',
                'font-size': 9,
                fill: '#94a3b8',
            })
            logLabel.textContent = `2^${tick.log2 % 1 === 0 ? tick.log2 : tick.log2.toFixed(1)}`
            svg.appendChild(logLabel)
        }

        // component curves plus the total, straight from the service samples
        if (data.curves) {
            data.curves.components.forEach((series, index) => {
                svg.appendChild(
                    this.curvePath(data.curves!.x, series, x, y, {
                        class: 'curve component-curve',
                        'data-component-index': index,
                        stroke: COMPONENT_COLORS[index % COMPONENT_COLORS.length],
                        display: view.hiddenComponents.includes(index) ? 'none' : 'inline',
                    }),
                )
            })
            svg.appendChild(
                this.curvePath(data.curves.x, data.curves.total, x, y, {
                    class: 'curve total-curve',
                    stroke: TOTAL_COLOR,
                    'stroke-dasharray': '6 3',
                }),
            )
        }

        // threshold line, labeled in minutes
        if (data.threshold) {
            const tx = x.apply(data.threshold.t_log2)
            svg.appendChild(
                el('line', {
                    class: 'threshold-line',
                    x1: tx,
                    x2: tx,
                    y1: margin.top,
                    y2: floor,
                    stroke: THRESHOLD_COLOR,
                    'stroke-width': 1.5,
                }),
            )
            const label = el('text', {
                class: 'threshold-label',
                x: tx + 6,
                y: margin.top + 12,
                'font-size': 12,
                fill: THRESHOLD_COLOR,
            })
            label.textContent = formatMinutes(data.threshold.threshold_min)
            svg.appendChild(label)
        }

        this.root.appendChild(svg)
    }

    private curvePath(
        xsData: number[],
        ysData: number[],
        x: LinearScale,
        y: LinearScale,
        attrs: Record<string, string | number>,
    ): SVGElement {
        const points = xsData.map((xv, i) => `${i === 0 ? 'M' : 'L'}${x.apply(xv).toFixed(2)},${y.apply(ysData[i]).toFixed(2)}`)
        return el('path', { ...attrs, d: points.join(''), fill: 'none', 'stroke-width': 1.8 })
    }
}
