"""Seeded generator for a synthetic cloud-CLI corpus in source vocabulary.

The generated pages mimic CLI reference HTML (navigation, synopsis, flags,
shared global-flag boilerplate, footer links). Forging them with the GCP
rename map gives the 200-tool, 50-task fixture benchmark shipped under
``data/cli_fixture``. Regenerate with ``python -m tooldocs.fixtures``.
"""

from __future__ import annotations

import argparse
import itertools
import json
import random
from dataclasses import dataclass
from importlib.resources import files
from pathlib import Path

from .corpusforge import Benchmark, RenameMap, SourceTask, build_benchmark, spec_from_page
from .registry import DemoExample, Registry, dump_registry, load_registry

# (command group, noun phrase, placeholder, verbs)
GROUPS: list[tuple[str, str, str, tuple[str, ...]]] = [
    ("gcloud pubsub topics", "message topic", "TOPIC", ("create", "delete", "describe", "list", "publish", "update")),
    ("gcloud pubsub subscriptions", "topic subscription", "SUBSCRIPTION",
     ("create", "delete", "describe", "list", "pull", "ack", "modify-push-config", "update")),
    ("gcloud compute instances", "virtual machine", "INSTANCE",
     ("create", "delete", "describe", "list", "start", "stop", "reset", "add-labels", "set-machine-type", "ssh")),
    ("gcloud compute disks", "persistent disk", "DISK", ("create", "delete", "describe", "list", "resize", "snapshot")),
    ("gcloud compute networks", "VPC network", "NETWORK", ("create", "delete", "describe", "list", "update")),
    ("gcloud compute networks subnets", "subnetwork", "SUBNET",
     ("create", "delete", "describe", "list", "update", "expand-ip-range")),
    ("gcloud compute firewall-rules", "firewall rule", "RULE", ("create", "delete", "describe", "list", "update")),
    ("gcloud compute addresses", "static address", "ADDRESS", ("create", "delete", "describe", "list")),
    ("gcloud compute images", "disk image", "IMAGE", ("create", "delete", "describe", "list")),
    ("gcloud run services", "serverless service", "SERVICE",
     ("delete", "describe", "list", "update", "update-traffic", "add-iam-policy-binding")),
    ("gcloud run jobs", "batch job", "JOB", ("create", "delete", "describe", "execute", "list")),
    ("gcloud scheduler jobs", "cron job", "JOB",
     ("create http", "create pubsub", "update", "delete", "describe", "list", "pause", "resume", "run")),
    ("gcloud composer environments", "workflow environment", "ENVIRONMENT",
     ("create", "delete", "describe", "list", "update", "run")),
    ("gcloud functions", "cloud function", "FUNCTION", ("deploy", "call", "delete", "describe", "list")),
    ("gcloud sql instances", "database instance", "INSTANCE",
     ("create", "delete", "describe", "list", "patch", "restart")),
    ("gcloud sql databases", "database", "DATABASE", ("create", "delete", "list")),
    ("gcloud sql users", "database user", "USER", ("create", "delete", "list", "set-password")),
    ("gcloud container clusters", "kubernetes cluster", "CLUSTER",
     ("create", "delete", "describe", "list", "get-credentials", "resize", "update", "upgrade")),
    ("gcloud iam service-accounts", "service account", "ACCOUNT", ("create", "delete", "describe", "list")),
    ("gcloud iam roles", "custom role", "ROLE", ("create", "delete", "describe", "list", "update")),
    ("gcloud projects", "project", "PROJECT_ID",
     ("create", "delete", "describe", "list", "add-iam-policy-binding", "remove-iam-policy-binding", "get-iam-policy")),
    ("gcloud config", "configuration property", "PROPERTY", ("set", "get-value", "list", "unset")),
    ("gcloud ai-platform models", "prediction model", "MODEL", ("create", "delete", "describe", "list")),
    ("gcloud ai-platform versions", "model version", "VERSION", ("create", "delete", "describe", "list")),
    ("gcloud ml speech", "audio recording", "AUDIO", ("recognize", "recognize-long-running")),
    ("gcloud ml vision", "picture", "IMAGE_PATH", ("detect-text", "detect-labels", "detect-faces")),
    ("gcloud ml language", "text document", "CONTENT", ("analyze-sentiment", "analyze-entities", "classify-text")),
    ("gcloud secrets", "secret", "SECRET", ("create", "delete", "describe", "list")),
    ("gcloud kms keyrings", "key ring", "KEYRING", ("create", "list")),
    ("gcloud kms keys", "encryption key", "KEY", ("create", "list")),
    ("gcloud dns managed-zones", "DNS zone", "ZONE", ("create", "delete", "describe", "list")),
    ("gcloud dns record-sets", "DNS record", "RECORD", ("create", "delete", "list")),
    ("gcloud logging sinks", "log sink", "SINK", ("create", "delete", "describe", "list")),
    ("gcloud redis instances", "memorystore instance", "INSTANCE", ("create", "delete", "describe", "list")),
    ("gcloud builds", "container build", "SOURCE", ("submit", "list", "cancel", "describe")),
    ("gcloud artifacts repositories", "artifact repository", "REPOSITORY", ("create", "delete", "describe", "list")),
    ("gcloud dataproc clusters", "spark cluster", "CLUSTER", ("create", "delete", "describe", "list")),
    ("gcloud dataflow jobs", "pipeline job", "JOB_ID", ("list", "cancel", "describe")),
    ("gcloud bigtable instances", "wide-column instance", "INSTANCE", ("create", "delete", "list")),
    ("gcloud spanner instances", "relational instance", "INSTANCE", ("create", "delete", "list")),
    ("gcloud filestore instances", "file share", "INSTANCE", ("create", "delete", "list")),
    ("gcloud services", "platform API", "SERVICE_NAME", ("enable", "disable", "list")),
    ("gsutil", "storage object", "URL", ("cp", "mb", "rb", "ls", "rm", "rsync", "mv", "cat")),
]

N_TOOLS = 200

_SUMMARY = {
    "create": "create a new {noun}",
    "delete": "delete a {noun}",
    "describe": "show details about a {noun}",
    "list": "list every {noun} in the project",
    "update": "update the settings of a {noun}",
    "deploy": "deploy a {noun} from source",
    "set": "set a {noun}",
    "cp": "copy a {noun} between locations",
    "mb": "make a bucket to hold {noun}s",
    "rb": "remove an empty bucket of {noun}s",
    "ls": "list each {noun} in a bucket",
    "rm": "remove a {noun}",
    "mv": "move a {noun} to a new location",
}

_FLAG_POOL = [
    ("--region", "REGION", "region in which the resource lives"),
    ("--zone", "ZONE", "zone in which the resource lives"),
    ("--labels", "KEY=VALUE", "list of label KEY=VALUE pairs to add"),
    ("--async", "", "return immediately without waiting for the operation to finish"),
    ("--description", "DESCRIPTION", "free text describing the resource"),
    ("--quiet", "", "disable all interactive prompts"),
    ("--format", "FORMAT", "output format such as json or yaml"),
    ("--filter", "EXPRESSION", "expression used to filter listed resources"),
    ("--port", "PORT", "port number the resource listens on"),
    ("--network", "NETWORK", "network the resource is attached to"),
]

_GLOBAL_FLAGS = (
    "GLOBAL FLAGS These flags are available to all commands: --access-token-file, --account, "
    "--billing-project, --configuration, --flags-file, --flatten, --format, --help, --impersonate-service-account, "
    "--log-http, --project, --quiet, --trace-token, --user-output-enabled, --verbosity. Run $ gcloud help for details. "
)

_FILLER = (
    "resource operation request response project region zone account permission policy role quota "
    "billing configuration property value output format default setting identity access network "
    "address service endpoint latency availability replica backup snapshot label metadata version "
    "release track alpha beta stable console library client api method parameter field string integer "
    "boolean duration timestamp status error retry timeout limit page token filter sort order "
    "operation resource request concurrency capacity scaling instance group template policy binding"
).split()

_NAMES = ["alpha", "orders", "ingest", "nightly", "web", "batch", "audit", "metrics", "cache", "edge",
          "ledger", "search", "media", "reports", "events", "stage", "prod", "sandbox", "mobile", "data"]


@dataclass(frozen=True)
class SourceTool:
    tool_id: str
    group: str
    verb: str
    noun: str
    placeholder: str

    @property
    def signature(self) -> str:
        if self.verb == "list":
            return self.tool_id
        return f"{self.tool_id} {self.placeholder}"


def catalog(n_tools: int = N_TOOLS) -> list[SourceTool]:
    tools = [SourceTool(f"{g} {v}", g, v, noun, ph) for g, noun, ph, verbs in GROUPS for v in verbs]
    if len(tools) < n_tools:
        raise ValueError(f"catalog has only {len(tools)} tools")
    return tools[:n_tools]


def _summary(tool: SourceTool) -> str:
    tmpl = _SUMMARY.get(tool.verb, "run the {verb} operation on a {noun}")
    return tmpl.format(noun=tool.noun, verb=tool.verb)


def render_page(tool: SourceTool, rng: random.Random) -> str:
    """One reference page as HTML, in source vocabulary."""
    flags = rng.sample(_FLAG_POOL, 3)
    flag_html = "\n".join(
        f"<dt><code>{f}{'=' + a if a else ''}</code></dt><dd>{d.capitalize()}.</dd>" for f, a, d in flags
    )
    filler = " ".join(rng.choice(_FILLER) for _ in range(rng.randint(250, 600)))
    example = tool.signature.replace(tool.placeholder, f"my-{rng.choice(_NAMES)}") if tool.verb != "list" else tool.tool_id
    ref = tool.tool_id.replace(" ", "/")
    return f"""<!DOCTYPE html>
<html><head><title>{tool.tool_id} | SDK reference</title>
<script>var analytics = true;</script></head>
<body>
<nav><a href="/sdk/docs">SDK</a> &gt; <a href="/sdk/gcloud/reference">gcloud reference</a> &gt; <a href="/sdk/{ref}">{tool.tool_id}</a></nav>
<h1>{tool.tool_id}</h1>
<h2>NAME</h2>
<p>{tool.tool_id} - {_summary(tool)}</p>
<h2>SYNOPSIS</h2>
<pre>{tool.signature} [{flags[0][0]}{'=' + flags[0][1] if flags[0][1] else ''}]</pre>
<h2>DESCRIPTION</h2>
<p>The {tool.verb} command is used to {_summary(tool)} ({tool.noun}). {tool.placeholder} is the ID of the {tool.noun} or a fully qualified identifier.</p>
<h2>FLAGS</h2>
<dl>
{flag_html}
</dl>
<h2>EXAMPLES</h2>
<p>To {_summary(tool)}, run:</p>
<pre>{example}</pre>
<p>{_GLOBAL_FLAGS}</p>
<h2>NOTES</h2>
<p>{filler}</p>
<footer><a href="/terms">Terms</a> <a href="/privacy">Privacy</a> <a href="/sdk/gcloud/reference/help">Help</a></footer>
</body></html>
"""


_QUESTIONS = [
    "How do I {a} a {noun} and then {b} it with the {group} commands?",
    "Show me the command lines to {a} a {noun} ({group}) and afterwards {b} it.",
    "Using the SDK, {a} a {noun} in {group}, then {b} it. Which commands do I need?",
]
_QUESTIONS3 = [
    "How do I {a} a {noun}, {b} it, and finally {c} it with the {group} commands?",
]


def _words(verb: str) -> str:
    return verb.replace("-", " ")


def _workflows(tools: list[SourceTool]) -> list[tuple[SourceTool, ...]]:
    by_group: dict[str, list[SourceTool]] = {}
    for t in tools:
        by_group.setdefault(t.group, []).append(t)
    flows: list[tuple[SourceTool, ...]] = []
    for members in by_group.values():
        members = sorted(members, key=_lifecycle_rank)
        flows.extend(itertools.combinations(members, 2))
        flows.extend(itertools.combinations(members[:4], 3))
    return flows


def _lifecycle_rank(tool: SourceTool) -> int:
    if tool.verb.split(" ")[0] in ("create", "deploy", "set", "mb", "enable", "submit"):
        return 0
    if tool.verb in ("delete", "rb", "rm", "unset", "disable", "cancel"):
        return 2
    return 1


def _question(flow: tuple[SourceTool, ...], rng: random.Random) -> str:
    group = flow[0].group.split(" ", 1)[1] if " " in flow[0].group else flow[0].group
    fields = {"noun": flow[0].noun, "group": group, "a": _words(flow[0].verb), "b": _words(flow[1].verb)}
    if len(flow) == 3:
        fields["c"] = _words(flow[2].verb)
        return rng.choice(_QUESTIONS3).format(**fields)
    return rng.choice(_QUESTIONS).format(**fields)


def synthetic_source(seed: int = 0, n_tools: int = N_TOOLS, n_tasks: int = 50, n_demos: int = 20):
    """Pages, source tasks and demos for a synthetic CLI in source vocabulary."""
    rng = random.Random(seed)
    tools = catalog(n_tools)
    pages = {t.tool_id: render_page(t, rng) for t in tools}
    flows = _workflows(tools)
    picked = rng.sample(flows, n_tasks + n_demos)
    tasks = [
        SourceTask(f"cli-{i + 1:03d}", _question(flow, rng), tuple(t.signature for t in flow))
        for i, flow in enumerate(picked[:n_tasks])
    ]
    demos = [DemoExample(_question(flow, rng), "\n".join(t.signature for t in flow)) for flow in picked[n_tasks:]]
    return pages, tasks, demos


def default_rename_map() -> RenameMap:
    return RenameMap.load(files("tooldocs") / "data" / "gcp_rename_map.json")


def build_fixture(seed: int = 0, rename_map: RenameMap | None = None, **kw) -> tuple[Benchmark, Registry]:
    pages, tasks, demos = synthetic_source(seed, **kw)
    reg = Registry.from_specs(spec_from_page(tool_id, page) for tool_id, page in pages.items())
    return build_benchmark(tasks, rename_map or default_rename_map(), reg, demos=demos,
                           source_corpus=f"synthetic-cli-seed{seed}", seed=seed)


def write_source(out_dir: str | Path, seed: int = 0, **kw) -> None:
    """Write raw pages plus tasks.json, the layout ``tooldocs forge`` reads."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pages, tasks, demos = synthetic_source(seed, **kw)
    for tool_id, page in pages.items():
        (out / f"{tool_id}.html").write_text(page, encoding="utf-8")
    payload = {
        "tasks": [{"task_id": t.task_id, "question": t.question, "gold_commands": list(t.gold_commands)} for t in tasks],
        "demos": [{"instruction": d.instruction, "plan": d.plan.split("\n")} for d in demos],
    }
    (out / "tasks.json").write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def fixture_paths() -> tuple[Path, Path]:
    base = Path(str(files("tooldocs") / "data" / "cli_fixture"))
    return base / "benchmark.json", base / "benchmark.tools.jsonl"


def load_fixture() -> tuple[Benchmark, Registry]:
    """The shipped 50-task benchmark and its renamed 200-tool registry."""
    bench_path, tools_path = fixture_paths()
    bench = Benchmark.load(bench_path)
    reg = load_registry(tools_path)
    reg.set_task_demos(bench.demo_pool)
    return bench, reg


def main(argv: list[str] | None = None) -> None:
    ap = argparse.ArgumentParser(description="Regenerate the shipped CLI fixture benchmark.")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--source-dir", help="also write the raw source pages and tasks.json here")
    args = ap.parse_args(argv)
    bench, reg = build_fixture(args.seed)
    bench_path, tools_path = fixture_paths()
    bench_path.parent.mkdir(parents=True, exist_ok=True)
    bench.save(bench_path)
    dump_registry(reg, tools_path)
    if args.source_dir:
        write_source(args.source_dir, args.seed)
    print(f"wrote {len(bench.tasks)} tasks and {len(reg)} tools to {bench_path.parent}")


if __name__ == "__main__":
    main()
