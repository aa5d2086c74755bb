"""Command-line entry point.

Subcommands: serve, run, replay, verify, analyze trials/tlx, patterns
export.  Exit codes: 0 success, 1 domain error, 2 usage error.  Every
error path prints a single machine-parseable ``error:<code>`` line before
the human-readable text.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import socket
import sys
import threading
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import analytics
from .bridge import BrokerServer, wall_clock_ticker
from .bus import Broker, canonical_json
from .config import SystemConfig
from .errors import CobotError, ScenarioError
from .gesture import GestureClass
from .haptics import default_pattern_set, dump_patterns
from .harness import Scenario, replay_log, run_scenario, verify_log
from .nodes import launch_core_nodes


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print("error:usage", file=sys.stderr)
        print(message, file=sys.stderr)
        self.print_usage(sys.stderr)
        raise SystemExit(2)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cobot", description="Projected-GUI cobot simulator")
    p.add_argument("--config", help="system config JSON (defaults built in)")
    p.add_argument("--tcp-port", type=int, help="override broker TCP port")
    p.add_argument("--ws-port", type=int, help="override broker WebSocket port")
    p.add_argument("--seed", type=int, help="override scenario seed")
    p.add_argument("--headless", action="store_true",
                   help="force headless (virtual clock) operation")
    sub = p.add_subparsers(dest="command")

    sp = sub.add_parser("serve", help="run broker + nodes with TCP/WS endpoints")
    sp.add_argument("--clock", choices=["wall", "virtual"], default="wall")
    sp.add_argument("--log", help="write the session log here on shutdown")
    sp.add_argument("--ui", action="store_true", help="serve the operator UI bundle")
    sp.add_argument("--ui-dir", help="directory of UI static assets")
    sp.add_argument("--tlx-csv", default="tlx_responses.csv",
                    help="append study/tlx submissions to this CSV")

    rp = sub.add_parser("run", help="execute a scenario")
    rp.add_argument("scenario", help="scenario JSON path or bundled name")
    rp.add_argument("--live", action="store_true",
                    help="drive an already-running broker over TCP in wall time")
    rp.add_argument("--log", help="write the session log here")
    rp.add_argument("--report", help="write the session report JSON here")

    pp = sub.add_parser("replay", help="re-publish a recorded session log")
    pp.add_argument("log")
    pp.add_argument("--speed", default="fast",
                    help="positive real divides original gaps; 'fast' skips pacing")
    pp.add_argument("--strict", action="store_true",
                    help="require the log's config digest to match the current config")
    pp.add_argument("--out", help="write the replayed log here")

    vp = sub.add_parser("verify", help="check a session log for corruption")
    vp.add_argument("log")

    ap = sub.add_parser("analyze", help="statistics over study data")
    asub = ap.add_subparsers(dest="analyze_kind")
    at = asub.add_parser("trials", help="confusion matrix, recognition rate, ANOVA, t-tests")
    at.add_argument("csv")
    ax = asub.add_parser("tlx", help="NASA TLX aggregation")
    ax.add_argument("csv")

    gp = sub.add_parser("patterns", help="tactile pattern utilities")
    gsub = gp.add_subparsers(dest="patterns_kind")
    ge = gsub.add_parser("export", help="dump the default pattern set as JSON")
    ge.add_argument("--out", help="write to file instead of stdout")
    return p


def _load_config(args) -> SystemConfig:
    config = SystemConfig.load(args.config) if args.config else SystemConfig()
    if args.tcp_port is not None:
        config.tcp_port = args.tcp_port
    if args.ws_port is not None:
        config.ws_port = args.ws_port
    return config


def _resolve_scenario(name: str) -> Path:
    path = Path(name)
    if path.exists():
        return path
    bundled = resources.files("cobot").joinpath("scenarios", f"{name}.json")
    if bundled.is_file():
        return bundled
    raise CobotError(f"scenario {name!r} not found (no such file or bundled scenario)",
                     **{"code": "file_error"})


# ---------------------------------------------------------------------------
# serve

def cmd_serve(args) -> int:
    import signal

    config = _load_config(args)
    clock = "virtual" if args.headless else args.clock
    broker = Broker(clock_mode=clock, config_digest=config.digest())
    launch_core_nodes(broker, config)
    _attach_tlx_recorder(broker, args.tlx_csv)
    ui_dir = None
    if args.ui or args.ui_dir:
        ui_dir = args.ui_dir or _default_ui_dir()
        if ui_dir is None:
            raise CobotError("no UI bundle found; build frontend/ or pass --ui-dir")

    def on_term(signum, frame):
        raise KeyboardInterrupt

    signal.signal(signal.SIGTERM, on_term)

    async def main():
        server = BrokerServer(broker, host=config.host, tcp_port=config.tcp_port,
                              ws_port=config.ws_port, ui_dir=ui_dir)
        await server.start()
        print(f"broker listening tcp={config.host}:{config.tcp_port} "
              f"ws={config.host}:{config.ws_port} clock={clock}"
              + (f" ui={ui_dir}" if ui_dir else ""))
        ticker = None
        if clock == "wall":
            ticker = asyncio.ensure_future(wall_clock_ticker(broker, config.tick_us))
        try:
            await asyncio.Event().wait()
        finally:
            if ticker:
                ticker.cancel()
            await server.stop()

    try:
        asyncio.run(main())
    except KeyboardInterrupt:
        pass
    finally:
        if args.log:
            broker.session_log().save(args.log)
            print(f"session log written to {args.log}")
    return 0


def _attach_tlx_recorder(broker, csv_path):
    """Append every study/tlx submission to a CSV (header written once)."""
    path = Path(csv_path)

    def on_tlx(msg):
        d = msg.data
        new = not path.exists()
        with path.open("a") as fh:
            if new:
                fh.write("subject,mental,physical,temporal,performance,effort,frustration\n")
            fh.write(",".join(str(d.get(k, "")) for k in (
                "subject", "mental", "physical", "temporal",
                "performance", "effort", "frustration")) + "\n")

    client = broker.client(name="tlx_recorder", on_message=on_tlx)
    client.subscribe("study/tlx")
    return client


def _default_ui_dir():
    here = Path(__file__).resolve()
    for root in (Path.cwd(), *here.parents):
        cand = root / "frontend" / "dist"
        if (cand / "index.html").is_file():
            return str(cand)
    return None


# ---------------------------------------------------------------------------
# run

def cmd_run(args) -> int:
    config = _load_config(args)
    scenario = Scenario.load(_resolve_scenario(args.scenario))
    if args.seed is not None:
        scenario.seed = args.seed
    if args.live:
        return _run_live(scenario, config)
    report, log = run_scenario(scenario, config, log_path=args.log)
    print(json.dumps(report.to_dict(), indent=2))
    if args.report:
        Path(args.report).write_text(json.dumps(report.to_dict(), indent=2))
    failed = [a for a in report.assertions if not a["passed"]]
    if failed:
        first = failed[0]
        print("error:assertion_failed", file=sys.stderr)
        print(f"failed predicate {first['topic']}:{first['path']} {first['op']} "
              f"{first['value']} at t={first['stamp_us']}us "
              f"(actual={first.get('actual')!r})", file=sys.stderr)
        return 1
    return 0


class _LiveClient:
    """Minimal blocking TCP client used by live-mode scenario driving."""

    def __init__(self, host, port):
        self.sock = socket.create_connection((host, port), timeout=5.0)
        self.latest = {}
        self.lock = threading.Lock()
        self._buf = b""
        threading.Thread(target=self._reader, daemon=True).start()

    def _reader(self):
        try:
            while True:
                chunk = self.sock.recv(65536)
                if not chunk:
                    return
                self._buf += chunk
                while b"\n" in self._buf:
                    line, self._buf = self._buf.split(b"\n", 1)
                    frame = json.loads(line)
                    if frame.get("op") == "pub":
                        with self.lock:
                            self.latest[frame["topic"]] = frame["data"]
        except OSError:
            return

    def send(self, frame: dict):
        self.sock.sendall((canonical_json(frame) + "\n").encode())

    def subscribe(self, pattern):
        self.send({"op": "sub", "topic": pattern})

    def publish(self, topic, data):
        self.send({"op": "pub", "topic": topic, "data": data})


def _run_live(scenario: Scenario, config: SystemConfig) -> int:
    from . import gesture as ges
    from . import projection as proj

    client = _LiveClient(config.host, config.tcp_port)
    client.subscribe("*")
    h_panel_to_cam = proj.invert_homography(config.camera_to_panel)
    tip, gesture = (0.5, 0.5), None
    frame_i = 0
    frame_dt = 1.0 / config.ui_frame_hz
    failures = []

    def emit_for(duration_s):
        nonlocal frame_i
        end = time.monotonic() + duration_s
        while time.monotonic() < end:
            if gesture is None:
                client.publish("hand/frames", {"absent": True})
            else:
                frame = ges.synth_frame(gesture, tip, seed=scenario.seed + frame_i)
                client.publish("hand/frames", ges.frame_to_dict(frame))
            frame_i += 1
            time.sleep(frame_dt)

    for step in scenario.steps:
        p = step.params
        if step.action == "move_tip":
            if "button" in p:
                b = config.panel.button(int(p["button"]))
                x, y, w, h = b.rect_mm
                tip = proj.project_point(h_panel_to_cam, (x + w / 2, y + h / 2))
            else:
                tip = (float(p["x"]), float(p["y"]))
        elif step.action == "set_gesture":
            g = p.get("gesture")
            gesture = None if g in (None, "none", "absent") else GestureClass(g)
        elif step.action == "wait":
            emit_for(float(p["s"]))
        elif step.action == "press_button":
            b = config.panel.button(int(p["button"]))
            x, y, w, h = b.rect_mm
            tip = proj.project_point(h_panel_to_cam, (x + w / 2, y + h / 2))
            gesture = GestureClass.Palm
            emit_for(0.1)
            gesture = GestureClass.One
            emit_for(float(p["hold_s"]))
            gesture = GestureClass.Palm
            emit_for(0.1)
        elif step.action == "assert":
            with client.lock:
                data = client.latest.get(p["topic"])
            ok = False
            if data is not None:
                try:
                    from .harness import OPS, _resolve_path
                    actual = _resolve_path(data, p.get("path", "")) if p.get("path") else data
                    ok = bool(OPS[p.get("op", "==")](actual, p["value"],
                                                     float(p.get("tol", 0.0))))
                except (ScenarioError, KeyError, IndexError, TypeError):
                    ok = False
            if not ok:
                failures.append(p)
    if failures:
        print("error:assertion_failed", file=sys.stderr)
        print(f"failed predicate {failures[0]}", file=sys.stderr)
        return 1
    print("live run complete")
    return 0


# ---------------------------------------------------------------------------
# replay / verify

def cmd_replay(args) -> int:
    config = _load_config(args)
    speed = args.speed if args.speed == "fast" else float(args.speed)
    old, new = replay_log(args.log, config, speed=speed, strict=args.strict)
    print(json.dumps({
        "original_digest": old.digest(),
        "replay_digest": new.digest(),
        "digests_equal": old.digest() == new.digest(),
        "messages": len(new.messages),
    }, indent=2))
    if args.out:
        new.save(args.out)
    return 0


def cmd_verify(args) -> int:
    report = verify_log(args.log)
    print(json.dumps(report, indent=2))
    return 0


# ---------------------------------------------------------------------------
# analyze

def cmd_analyze_trials(args) -> int:
    kind = analytics.sniff_trials_file(args.csv)
    out = {"input": str(args.csv), "mode": kind}
    if kind == "trials":
        trials = analytics.load_trials_csv(args.csv)
        cm = analytics.confusion_matrix(trials)
        subjects, acc = analytics.subject_accuracy(trials)
        groups = [acc[:, j] for j in range(analytics.N_PATTERNS)]
        anova = analytics.anova_oneway(groups)
        rm = analytics.anova_repeated_measures(acc)
        ttests = analytics.pairwise_ttests(acc)
        out.update({
            "trials": len(trials),
            "subjects": subjects,
            "confusion_matrix": cm.normalized.round(4).tolist(),
            "recognition_rate": analytics.recognition_rate(cm),
            "anova_oneway": {"F": anova.F, "df": [anova.df1, anova.df2], "p": anova.p},
            "anova_repeated_measures": {"F": rm.F, "df": [rm.df1, rm.df2], "p": rm.p},
            "paired_ttests": {
                f"{i}v{j}": {"t": r.t, "df": r.df, "p": r.p, "degenerate": r.degenerate}
                for (i, j), r in sorted(ttests.items())
            },
        })
    else:
        cm = analytics.load_table_csv(args.csv)
        out.update({
            "confusion_matrix": cm.normalized.round(4).tolist(),
            "recognition_rate": analytics.recognition_rate(cm),
            "note": "aggregated table input: per-subject ANOVA/t-tests unavailable",
        })

    print("confusion matrix (rows = actual, cols = perceived):")
    for i, row in enumerate(np.asarray(out["confusion_matrix"])):
        print(f"  {i + 1}: " + " ".join(f"{v:5.2f}" for v in row))
    print(f"recognition rate: {out['recognition_rate']:.4f}")
    if "anova_oneway" in out:
        a = out["anova_oneway"]
        print(f"one-way ANOVA: F({a['df'][0]},{a['df'][1]}) = {a['F']:.3f}, p = {a['p']:.3f}")
        r = out["anova_repeated_measures"]
        print(f"repeated-measures ANOVA: F({r['df'][0]},{r['df'][1]}) = {r['F']:.3f}, "
              f"p = {r['p']:.3f}")
        sig = {k: v for k, v in out["paired_ttests"].items() if v["p"] < 0.05}
        print(f"paired t-tests: {len(out['paired_ttests'])} pairs, "
              f"{len(sig)} significant at 0.05: {sorted(sig)}")
    print(json.dumps(out, indent=2))
    return 0


def cmd_analyze_tlx(args) -> int:
    responses = analytics.load_tlx_csv(args.csv)
    means = analytics.aggregate_tlx(responses)
    scores = [analytics.tlx_score(r) for r in responses]
    out = {
        "input": str(args.csv),
        "responses": len(responses),
        "subscale_means": {k: v for k, v in means.items() if k != "overall_raw"},
        "overall_raw_mean": means["overall_raw"],
        "raw_scores": [s["raw"] for s in scores],
        "weighted_scores": [s["weighted"] for s in scores],
    }
    print(analytics.format_tlx_table(means))
    print(json.dumps(out, indent=2))
    return 0


def cmd_patterns_export(args) -> int:
    text = dump_patterns(default_pattern_set())
    if args.out:
        Path(args.out).write_text(text)
        print(f"pattern set written to {args.out}")
    else:
        print(text)
    return 0


# ---------------------------------------------------------------------------

def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2
    try:
        if args.command == "serve":
            return cmd_serve(args)
        if args.command == "run":
            return cmd_run(args)
        if args.command == "replay":
            return cmd_replay(args)
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "analyze":
            if args.analyze_kind == "trials":
                return cmd_analyze_trials(args)
            if args.analyze_kind == "tlx":
                return cmd_analyze_tlx(args)
            print("error:usage", file=sys.stderr)
            print("analyze needs a subcommand: trials | tlx", file=sys.stderr)
            return 2
        if args.command == "patterns":
            if args.patterns_kind == "export":
                return cmd_patterns_export(args)
            print("error:usage", file=sys.stderr)
            print("patterns needs a subcommand: export", file=sys.stderr)
            return 2
        return 2
    except CobotError as exc:
        code = exc.details.get("code", exc.code) if isinstance(exc.details, dict) else exc.code
        print(f"error:{code}", file=sys.stderr)
        print(str(exc), file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print("error:file_error", file=sys.stderr)
        print(str(exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
