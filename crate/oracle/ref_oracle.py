#!/usr/bin/env python3
"""Reference-runtime tracer: runs a subject program under CPython with a line
trace hook and prints one interchange JSON document.

Request (stdin): {"program_id", "source", "entry", "input", "limits"}
where "input" is an argument-tuple literal such as "([1, 2], 3)" and
"limits" holds optional "step_budget", "recursion_budget", "timeout_s".
"""

import ast
import builtins
import io
import json
import math
import signal
import sys
from contextlib import redirect_stdout

DENIED = {
    "open", "input", "exec", "eval", "compile", "__import__", "breakpoint", "exit", "quit",
    "help", "globals", "locals", "vars", "getattr", "setattr", "delattr", "memoryview",
}

ERROR_KINDS = {
    "NameError", "TypeError", "ValueError", "IndexError", "KeyError", "ZeroDivisionError",
    "AttributeError", "AssertionError", "OverflowError",
}


class StepLimit(Exception):
    pass


class RecursionLimit(Exception):
    pass


class WallClock(Exception):
    pass


def is_native(v, depth=0):
    if depth > 64:
        return False
    if isinstance(v, (bool, int, str)):
        return True
    if isinstance(v, float):
        return math.isfinite(v)
    if type(v) is list:
        return all(is_native(x, depth + 1) for x in v)
    if type(v) is dict:
        return all(type(k) is str and is_native(x, depth + 1) for k, x in v.items())
    return False


def render(v):
    """JSON text for a value: native JSON where possible, else its repr as a string."""
    if is_native(v):
        return json.loads(json.dumps(v))
    return repr(v)


def parse_args(text):
    try:
        tree = ast.parse("__args__" + text, mode="eval")
        if isinstance(tree.body, ast.Call) and not tree.body.keywords:
            return [ast.literal_eval(a) for a in tree.body.args]
    except SyntaxError:
        pass
    return [ast.literal_eval(text)]


def error_kind(exc):
    if isinstance(exc, StepLimit):
        return "StepLimitExceeded"
    if isinstance(exc, (RecursionLimit, RecursionError)):
        return "RecursionLimit"
    for cls in type(exc).__mro__:
        if cls.__name__ in ERROR_KINDS:
            return cls.__name__
    return type(exc).__name__


class Tracer:
    def __init__(self, codes, step_budget, recursion_budget):
        self.codes = codes
        self.step_budget = step_budget
        self.recursion_budget = recursion_budget
        self.events = []
        self.ordinals = {}
        self.depth = 0
        # per frame: [pending line, snapshot, raised]
        self.frames = {}

    def emit(self, frame, line, kind):
        if len(self.events) >= self.step_budget:
            raise StepLimit("step budget exhausted")
        st = self.frames[id(frame)]
        now = [(k, repr(v), v) for k, v in frame.f_locals.items()]
        old = dict(st[1])
        changed = {k: render(v) for k, r, v in now if old.get(k) != r}
        st[1] = [(k, r) for k, r, _ in now]
        self.ordinals[line] = self.ordinals.get(line, 0) + 1
        self.events.append({"line": line, "ordinal": self.ordinals[line], "changed": changed, "kind": kind})

    def hook(self, frame, event, arg):
        if event != "call" or frame.f_code not in self.codes:
            return None
        if self.depth + 1 > self.recursion_budget:
            raise RecursionLimit("maximum recursion depth exceeded")
        self.depth += 1
        self.frames[id(frame)] = [None, [], False]
        self.emit(frame, frame.f_code.co_firstlineno, "entry")
        return self.local

    def local(self, frame, event, arg):
        st = self.frames[id(frame)]
        if event == "line":
            if st[0] is not None:
                self.emit(frame, st[0], "statement")
            st[0] = frame.f_lineno
            st[2] = False
        elif event == "exception":
            st[2] = True
        elif event == "return":
            if st[0] is not None and not st[2]:
                self.emit(frame, st[0], "return")
            self.depth -= 1
            del self.frames[id(frame)]
        return self.local


def function_codes(module_code):
    return {c for c in module_code.co_consts if hasattr(c, "co_code") and not c.co_name.startswith("<")}


def oracle_trace(req):
    limits = req.get("limits") or {}
    step_budget = limits.get("step_budget", 100_000)
    recursion_budget = limits.get("recursion_budget", 200)
    timeout = limits.get("timeout_s", 10)
    out = {
        "program_id": req.get("program_id", ""),
        "entry": req["entry"],
        "input": {},
        "events": [],
        "outcome": {"status": "oracle-failure"},
        "stdout": "",
        "steps": 0,
    }
    try:
        tree = ast.parse(req["source"])
        tree.body = [s for s in tree.body if isinstance(s, (ast.FunctionDef, ast.Import, ast.ImportFrom))]
        code = compile(tree, "<subject>", "exec")
        safe = {k: v for k, v in vars(builtins).items() if k not in DENIED}
        safe["__import__"] = lambda name, *a, **k: __import__(name, *a, **k) if name == "typing" else None
        env = {"__builtins__": safe, "__name__": "subject"}
        exec(code, env)
        func = env[req["entry"]]
        args = parse_args(req["input"]) if isinstance(req["input"], str) else list(req["input"])
        params = func.__code__.co_varnames[: func.__code__.co_argcount]
        out["input"] = {p: render(a) for p, a in zip(params, args)}
    except Exception as e:  # noqa: BLE001
        out["outcome"] = {"status": "oracle-failure", "message": f"{type(e).__name__}: {e}"}
        return out

    tracer = Tracer(function_codes(code), step_budget, recursion_budget)
    buf = io.StringIO()

    def on_alarm(signum, frame):
        raise WallClock("wall-clock limit")

    old = signal.signal(signal.SIGALRM, on_alarm)
    signal.setitimer(signal.ITIMER_REAL, timeout)
    try:
        with redirect_stdout(buf):
            sys.settrace(tracer.hook)
            try:
                value = func(*args)
            finally:
                sys.settrace(None)
        out["outcome"] = {"status": "return", "value": render(value)}
    except WallClock:
        out["outcome"] = {"status": "error", "error_kind": "StepLimitExceeded", "message": "wall-clock limit"}
    except Exception as e:  # noqa: BLE001
        line = None
        tb = e.__traceback__
        while tb is not None:
            if tb.tb_frame.f_code in tracer.codes:
                line = tb.tb_lineno
            tb = tb.tb_next
        out["outcome"] = {"status": "error", "error_kind": error_kind(e), "message": str(e)}
        if line is not None:
            out["outcome"]["line"] = line
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
        signal.signal(signal.SIGALRM, old)
    out["events"] = tracer.events
    out["stdout"] = buf.getvalue()
    out["steps"] = len(tracer.events)
    return out


def main():
    try:
        req = json.load(sys.stdin)
    except ValueError as e:
        print(f"bad request: {e}", file=sys.stderr)
        return 2
    if "--batch" in sys.argv:
        reqs = req
        print(json.dumps([oracle_trace(r) for r in reqs]))
    else:
        print(json.dumps(oracle_trace(req)))
    return 0


if __name__ == "__main__":
    sys.exit(main())
