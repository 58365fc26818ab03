import { connect } from './connection';
import { buildControls } from './controls';
import { drawStrip } from './charts';
import { RobotScene } from './scene';
import { buildSceneModel } from './scenemodel';
import { ViewModel } from './viewmodel';

const canvas = document.getElementById('scene') as HTMLCanvasElement;
const controlsRoot = document.getElementById('controls') as HTMLElement;
const heightChart = document.getElementById('chart-height') as HTMLCanvasElement;
const marginChart = document.getElementById('chart-margins') as HTMLCanvasElement;

const vm = new ViewModel();
const scene = new RobotScene(canvas);
const controls = buildControls(controlsRoot, vm);

const proto = location.protocol === 'https:' ? 'wss' : 'ws';
const url = `${proto}://${location.host}/ws`;
connect(url, vm, () => controls.refresh());

function tick(): void {
  if (vm.hello && vm.frame) {
    scene.render(buildSceneModel(vm.hello, vm.frame), vm.frame.com[0]);
    drawStrip(heightChart, vm.history, 'height');
    drawStrip(marginChart, vm.history, 'margins');
  }
  requestAnimationFrame(tick);
}
tick();
