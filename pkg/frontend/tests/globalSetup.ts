/** Spawns the real annotation service for the end-to-end tests.
 *
 * Builds a store from the repository's CoNLL-U fixture via the CLI, starts
 * `corefkit serve` on a free port, and tears it down afterwards. The
 * server address and store paths are handed to tests via a JSON file next
 * to this module.
 */

import { spawn, spawnSync, ChildProcess } from "node:child_process";
import { createServer } from "node:net";
import { mkdtempSync, writeFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";

const PYTHON = process.env.COREFKIT_PYTHON ?? "python3";
const REPO_ROOT = resolve(__dirname, "..", "..");
const SERVER_INFO = join(__dirname, ".server.json");

let child: ChildProcess | null = null;
let workDir: string | null = null;

function freePort(): Promise<number> {
  return new Promise((done, fail) => {
    const probe = createServer();
    probe.on("error", fail);
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address === null || typeof address === "string") {
        fail(new Error("no port"));
        return;
      }
      probe.close(() => done(address.port));
    });
  });
}

function cli(args: string[], cwd: string) {
  const out = spawnSync(PYTHON, ["-m", "corefkit.cli", ...args],
                        { cwd, encoding: "utf-8" });
  if (out.status !== 0) {
    throw new Error(`corefkit ${args[0]} failed: ${out.stderr}\n${out.stdout}`);
  }
}

async function waitForHealth(baseUrl: string, timeoutMs = 30000) {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      const resp = await fetch(`${baseUrl}/healthz`);
      if (resp.ok) return;
    } catch {
      /* not up yet */
    }
    if (Date.now() > deadline) {
      throw new Error(`service at ${baseUrl} did not come up`);
    }
    await new Promise((r) => setTimeout(r, 100));
  }
}

export async function setup() {
  workDir = mkdtempSync(join(tmpdir(), "corefkit-ui-"));
  const conlluDir = join(workDir, "conllu");
  const storeDir = join(workDir, "store");
  const corpusPath = join(workDir, "corpus.json");
  const tutorialPath = join(workDir, "tutorial.json");

  spawnSync("mkdir", ["-p", conlluDir]);
  spawnSync("cp", [join(REPO_ROOT, "tests", "fixtures", "examples.conllu"),
                   conlluDir]);

  cli(["ingest", "--conllu", conlluDir, "--out", corpusPath,
       "--target-tokens", "20", "--min-tail-tokens", "5"], workDir);
  cli(["detect", "--corpus", corpusPath], workDir);
  cli(["tutorial-check", "--write-example", tutorialPath], workDir);

  const port = await freePort();
  child = spawn(PYTHON, [
    "-m", "corefkit.cli", "serve", "--store", storeDir,
    "--corpus", corpusPath, "--tutorial", tutorialPath,
    "--target-annotations", "5",
    "--host", "127.0.0.1", "--port", String(port),
  ], { cwd: workDir, stdio: ["ignore", "pipe", "pipe"] });
  child.stderr?.on("data", (chunk) => {
    process.stderr.write(`[serve] ${chunk}`);
  });

  const baseUrl = `http://127.0.0.1:${port}`;
  await waitForHealth(baseUrl);
  writeFileSync(SERVER_INFO, JSON.stringify({
    baseUrl,
    storeDir,
    tutorialPath,
    corpusPath,
  }));
}

export async function teardown() {
  if (child) {
    child.kill("SIGTERM");
    await new Promise((r) => setTimeout(r, 200));
    if (!child.killed) child.kill("SIGKILL");
    child = null;
  }
  if (workDir) {
    rmSync(workDir, { recursive: true, force: true });
    workDir = null;
  }
  rmSync(SERVER_INFO, { force: true });
}
