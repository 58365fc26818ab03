// Strip charts for CoM height (% of neutral) and stability margins.

export interface HistoryPoint {
  t: number;
  heightPct: number;
  up: number | null;
  down: number | null;
}

export function drawStrip(
  canvas: HTMLCanvasElement,
  history: HistoryPoint[],
  mode: 'height' | 'margins',
): void {
  const ctx = canvas.getContext('2d');
  if (!ctx || history.length < 2) return;
  const w = canvas.width;
  const h = canvas.height;
  ctx.fillStyle = '#10151a';
  ctx.fillRect(0, 0, w, h);
  const t0 = history[0].t;
  const t1 = history[history.length - 1].t;
  const span = Math.max(t1 - t0, 1e-6);

  const plot = (
    pick: (p: HistoryPoint) => number | null,
    lo: number,
    hi: number,
    color: string,
  ) => {
    ctx.strokeStyle = color;
    ctx.lineWidth = 1.4;
    ctx.beginPath();
    let pen = false;
    for (const p of history) {
      const v = pick(p);
      if (v === null || Number.isNaN(v)) {
        pen = false;
        continue;
      }
      const x = ((p.t - t0) / span) * w;
      const y = h - ((v - lo) / (hi - lo)) * h;
      if (pen) ctx.lineTo(x, y);
      else ctx.moveTo(x, y);
      pen = true;
    }
    ctx.stroke();
  };

  ctx.strokeStyle = '#26323c';
  ctx.beginPath();
  ctx.moveTo(0, h / 2);
  ctx.lineTo(w, h / 2);
  ctx.stroke();

  if (mode === 'height') {
    plot((p) => p.heightPct, 60, 120, '#69f0ae');
    ctx.fillStyle = '#9fb3c8';
    ctx.font = '10px monospace';
    ctx.fillText('CoM height % (60..120)', 6, 12);
  } else {
    plot((p) => p.up, -3, 8, '#4fa3ff');
    plot((p) => p.down, -3, 8, '#ffab40');
    ctx.fillStyle = '#9fb3c8';
    ctx.font = '10px monospace';
    ctx.fillText('margins cm: uphill (blue) / downhill (orange)', 6, 12);
  }
}
