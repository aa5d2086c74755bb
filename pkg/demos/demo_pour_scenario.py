"""Full pipeline, headless: the bundled two-container pour task.

Runs the scripted session twice to show bit-determinism, then prints a
timeline of the interesting bus traffic from the recorded log.
"""

from importlib import resources

from cobot.config import SystemConfig
from cobot.harness import Scenario, run_scenario

scenario = Scenario.load(
    resources.files("cobot").joinpath("scenarios", "pour_two_containers.json"))
config = SystemConfig()

report, log = run_scenario(scenario, config)
report2, _ = run_scenario(scenario, config)

print(f"task completed: {report.task_completed}")
print(f"virtual time:   {report.elapsed_s:.2f} s")
print(f"press events:   {report.press_event_count}")
print(f"pour events:    {report.pour_events}")
print(f"conservation:   max deviation {report.conservation_max_dev:.1e}")
print(f"digest:         {report.determinism_digest[:24]}…")
print(f"repeatable:     {report.determinism_digest == report2.determinism_digest}")

print("\ntimeline:")
last_fill = None
for m in log.messages:
    t = m.stamp_us / 1e6
    if m.topic == "gui/button_events":
        print(f"  {t:6.2f}s  {m.data['kind']:7s} {m.data['action']}")
    elif m.topic == "scene/state":
        fills = tuple(round(c["fill_fraction"], 2) for c in m.data["containers"])
        box = round(m.data["box"]["content_fraction"], 2)
        snapshot = (fills, box, m.data["attached"])
        if snapshot != last_fill:
            last_fill = snapshot
            print(f"  {t:6.2f}s  containers {fills}, box {box}, "
                  f"attached={m.data['attached']}")
