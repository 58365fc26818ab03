// DOM control panel: cable sliders, policy start/stop, incline dial,
// reset-to-face picker, speed, and keyboard gait drumming.

import { ViewModel } from './viewmodel';

export interface ControlRefs {
  sliders: Map<number, HTMLInputElement>;
  status: HTMLElement;
  refresh(): void;
}

const POLICIES = ['single', 'simultaneous', 'alternating'];
const GAIT_KEYS = ['1', '2', '3', '4', '5', '6'];

export function buildControls(root: HTMLElement, vm: ViewModel): ControlRefs {
  root.innerHTML = '';
  const sliders = new Map<number, HTMLInputElement>();

  const status = document.createElement('div');
  status.className = 'status';
  root.appendChild(status);

  const cablePanel = document.createElement('div');
  cablePanel.className = 'panel';
  cablePanel.innerHTML = '<h3>cables (rest-length fraction)</h3>';
  root.appendChild(cablePanel);

  const policyPanel = document.createElement('div');
  policyPanel.className = 'panel';
  policyPanel.innerHTML = '<h3>policies</h3>';
  root.appendChild(policyPanel);

  for (const kind of POLICIES) {
    const btn = document.createElement('button');
    btn.textContent = `run ${kind}`;
    btn.onclick = () => vm.issue({ kind: 'run_policy', policy_kind: kind });
    policyPanel.appendChild(btn);
  }
  const stop = document.createElement('button');
  stop.textContent = 'stop policy';
  stop.onclick = () => vm.issue({ kind: 'stop_policy' });
  policyPanel.appendChild(stop);

  const worldPanel = document.createElement('div');
  worldPanel.className = 'panel';
  worldPanel.innerHTML = '<h3>world</h3>';
  root.appendChild(worldPanel);

  const incline = document.createElement('input');
  incline.type = 'range';
  incline.min = '0';
  incline.max = '30';
  incline.step = '0.5';
  incline.value = '0';
  const inclineLabel = document.createElement('span');
  inclineLabel.textContent = 'incline 0.0°';
  incline.oninput = () => {
    inclineLabel.textContent = `incline ${Number(incline.value).toFixed(1)}°`;
  };
  incline.onchange = () => vm.issue({ kind: 'set_incline', incline_deg: Number(incline.value) });
  worldPanel.append(inclineLabel, incline);

  const facePick = document.createElement('select');
  for (let f = 0; f < 8; f++) {
    const opt = document.createElement('option');
    opt.value = String(f);
    opt.textContent = `face ${f}`;
    facePick.appendChild(opt);
  }
  const resetBtn = document.createElement('button');
  resetBtn.textContent = 'reset to face';
  resetBtn.onclick = () => vm.issue({ kind: 'reset', face: Number(facePick.value) });
  worldPanel.append(facePick, resetBtn);

  const pause = document.createElement('button');
  pause.textContent = 'pause';
  pause.onclick = () => vm.issue({ kind: 'pause' });
  const resume = document.createElement('button');
  resume.textContent = 'resume';
  resume.onclick = () => vm.issue({ kind: 'resume' });
  worldPanel.append(pause, resume);

  const speed = document.createElement('input');
  speed.type = 'range';
  speed.min = '-1';
  speed.max = '0.7';
  speed.step = '0.05';
  speed.value = '0';
  const speedLabel = document.createElement('span');
  speedLabel.textContent = 'speed 1.00x';
  speed.oninput = () => {
    const factor = Math.pow(10, Number(speed.value));
    speedLabel.textContent = `speed ${factor.toFixed(2)}x`;
  };
  speed.onchange = () =>
    vm.issue({ kind: 'set_speed', factor: Math.pow(10, Number(speed.value)) });
  worldPanel.append(speedLabel, speed);

  function buildSliders(): void {
    if (!vm.hello || sliders.size > 0) return;
    for (const cable of vm.hello.actuated_cables) {
      const row = document.createElement('div');
      row.className = 'cable-row';
      const label = document.createElement('span');
      label.textContent = `cable ${cable}`;
      const slider = document.createElement('input');
      slider.type = 'range';
      slider.min = '0.22';
      slider.max = '1.0';
      slider.step = '0.01';
      slider.value = '1.0';
      slider.dataset.cable = String(cable);
      slider.onchange = () => {
        if (vm.locked) {
          refresh();
          return;
        }
        vm.setCable(cable, Number(slider.value));
      };
      const val = document.createElement('span');
      val.className = 'val';
      row.append(label, slider, val);
      cablePanel.appendChild(row);
      sliders.set(cable, slider);
    }
  }

  // keyboard gait drumming: keys 1..6 pulse the actuated cables in gait order
  window.addEventListener('keydown', (ev) => {
    const idx = GAIT_KEYS.indexOf(ev.key);
    if (idx < 0 || !vm.hello || vm.locked) return;
    const cable = vm.hello.actuated_cables[idx];
    const ctl = vm.cables.get(cable);
    const engaged = ctl !== undefined && ctl.confirmed < 0.99;
    vm.setCable(cable, engaged ? 1.0 : 0.38);
  });

  function refresh(): void {
    buildSliders();
    const f = vm.frame;
    status.innerHTML = f
      ? `conn: <b>${vm.connection}</b> | t=${f.time.toFixed(2)}s | incline ${f.incline_deg.toFixed(1)}° `
        + `| distance ${f.distance_cm.toFixed(1)} cm | face ${f.current_face ?? '—'} `
        + `| contacts ${f.contact_set.length} | policy ${f.policy_running ?? '—'}`
        + `${f.paused ? ' | <b>PAUSED</b>' : ''}`
        + `${vm.lastError ? `<div class="err">${vm.lastError}</div>` : ''}`
      : `conn: ${vm.connection}`;
    for (const [cable, slider] of sliders) {
      const ctl = vm.cables.get(cable);
      if (!ctl) continue;
      if (ctl.pendingId === null && document.activeElement !== slider) {
        slider.value = String(ctl.slider);
      }
      slider.disabled = vm.locked || vm.connection !== 'connected';
      const val = slider.parentElement?.querySelector('.val');
      if (val && f) {
        const idx = vm.hello?.actuated_cables.indexOf(cable) ?? -1;
        const actual = idx >= 0 ? f.target_fractions[idx] : 1;
        val.textContent = `${Number(slider.value).toFixed(2)} (cmd ${actual.toFixed(2)})`;
      }
    }
  }

  return { sliders, status, refresh };
}
