import type { FilterSpecJson } from './types'

// The analyst's working state. Pure data: every mutation returns a new value,
// so the chart is a function of (server responses, ViewState) and nothing else.
export interface ViewState {
    activeFitId: string | null
    chosenK: number
    filterDraft: FilterSpecJson
    binWidth: number
    hiddenComponents: readonly number[]
    accepted: boolean
}

export const MIN_K = 2
export const MAX_K = 4
export const DEFAULT_BIN_WIDTH = 0.25

export function initialViewState(): ViewState {
    return {
        activeFitId: null,
        chosenK: 2,
        filterDraft: {},
        binWidth: DEFAULT_BIN_WIDTH,
        hiddenComponents: [],
        accepted: false,
    }
}

export function validateViewState(view: ViewState): string[] {
    const problems: string[] = []
    if (!Number.isInteger(view.chosenK) || view.chosenK < MIN_K || view.chosenK > MAX_K) {
        problems.push(`chosen k ${view.chosenK} outside [${MIN_K}, ${MAX_K}]`)
    }
    if (view.accepted && view.activeFitId === null) {
        problems.push('accepted without an active fit')
    }
    if (!(view.binWidth > 0)) {
        problems.push(`bin width ${view.binWidth} must be > 0`)
    }
    return problems
}

function checked(view: ViewState): ViewState {
    const problems = validateViewState(view)
    if (problems.length) throw new Error(problems.join('; '))
    return view
}

export function withChosenK(view: ViewState, k: number): ViewState {
    return checked({ ...view, chosenK: k })
}

export function withBinWidth(view: ViewState, binWidth: number): ViewState {
    return checked({ ...view, binWidth })
}

export function withFilterDraft(view: ViewState, filterDraft: FilterSpecJson): ViewState {
    return checked({ ...view, filterDraft })
}

// A fresh fit replaces the active one; acceptance and toggles reset with it.
export function withActiveFit(view: ViewState, fitId: string): ViewState {
    return checked({ ...view, activeFitId: fitId, accepted: false, hiddenComponents: [] })
}

export function withAccepted(view: ViewState): ViewState {
    return checked({ ...view, accepted: true })
}

export function toggleComponent(view: ViewState, index: number): ViewState {
    const hidden = view.hiddenComponents.includes(index)
        ? view.hiddenComponents.filter((i) => i !== index)
        : [...view.hiddenComponents, index]
    return checked({ ...view, hiddenComponents: hidden })
}
