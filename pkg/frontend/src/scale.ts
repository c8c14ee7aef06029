// Axis helpers for the log2-seconds x-axis. Positions only; every plotted
// density value comes from the service, never from client-side math.

export interface Tick {
    log2: number
    label: string
}

export const DURATION_TICKS: readonly Tick[] = [
    { log2: 0, label: '1 s' },
    { log2: Math.log2(15), label: '15 s' },
    { log2: Math.log2(60), label: '1 min' },
    { log2: Math.log2(600), label: '10 min' },
    { log2: Math.log2(3600), label: '1 hour' },
    { log2: Math.log2(21600), label: '6 hours' },
    { log2: Math.log2(86400), label: '1 day' },
    { log2: Math.log2(604800), label: '1 week' },
    { log2: Math.log2(2592000), label: '1 month' },
    { log2: Math.log2(31536000), label: '1 year' },
]

export class LinearScale {
    constructor(
        private readonly d0: number,
        private readonly d1: number,
        private readonly r0: number,
        private readonly r1: number,
    ) {}

    apply(v: number): number {
        if (this.d1 === this.d0) return (this.r0 + this.r1) / 2
        return this.r0 + ((v - this.d0) / (this.d1 - this.d0)) * (this.r1 - this.r0)
    }
}

export function ticksWithin(lo: number, hi: number): Tick[] {
    return DURATION_TICKS.filter((t) => t.log2 >= lo && t.log2 <= hi)
}

export function formatMinutes(minutes: number): string {
    if (minutes >= 100) return `${Math.round(minutes)} min`
    return `${minutes.toFixed(1)} min`
}
