import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { plotConvergence } from "./convergence";
import { plotHeatmap } from "./heatmap";
import { plotChord } from "./chord";
import { plotPoincare } from "./poincare";
import { readConvergence, readPoincare, readSnapshot } from "./csv";
import { writeFigure } from "./svg";

async function main(): Promise<void> {
  await yargs(hideBin(process.argv))
    .command("convergence <csv> <out>", "log-log convergence plot",
      (y) => y.positional("csv", { type: "string", demandOption: true })
        .positional("out", { type: "string", demandOption: true }),
      async (argv) => {
        const svg = plotConvergence(readConvergence(argv.csv as string));
        await writeFigure(svg, argv.out as string);
      })
    .command("heatmap <csv> <out>", "solution heatmap with optional overlay",
      (y) => y.positional("csv", { type: "string", demandOption: true })
        .positional("out", { type: "string", demandOption: true })
        .option("poincare", { type: "string" })
        .option("reference", { type: "string",
          describe: "same-grid snapshot for the error panel" })
        .option("cutoff", { type: "number" }),
      async (argv) => {
        const svg = plotHeatmap(readSnapshot(argv.csv as string), {
          poincare: argv.poincare ? readPoincare(argv.poincare) : undefined,
          reference: argv.reference ? readSnapshot(argv.reference) : undefined,
          cutoff: argv.cutoff ?? null,
        });
        await writeFigure(svg, argv.out as string);
      })
    .command("chord <out>", "solution along the y=0 chord",
      (y) => y.positional("out", { type: "string", demandOption: true })
        .option("csv", { type: "array", demandOption: true,
          describe: "snapshot CSVs, one curve each" })
        .option("labels", { type: "array" })
        .option("title", { type: "string", default: "chord y=0" }),
      async (argv) => {
        const csvs = (argv.csv as string[]).map(String);
        const labels = (argv.labels as string[] | undefined)?.map(String) ?? csvs;
        const svg = plotChord([{
          title: argv.title as string,
          snapshots: csvs.map((path, k) => ({
            label: labels[k] ?? path,
            nodes: readSnapshot(path),
          })),
        }]);
        await writeFigure(svg, argv.out as string);
      })
    .command("poincare <csv> <out>", "Poincare section scatter",
      (y) => y.positional("csv", { type: "string", demandOption: true })
        .positional("out", { type: "string", demandOption: true }),
      async (argv) => {
        const svg = plotPoincare(readPoincare(argv.csv as string));
        await writeFigure(svg, argv.out as string);
      })
    .demandCommand(1)
    .strict()
    .parse();
}

main().catch((err) => {
  console.error(err.message ?? err);
  process.exit(1);
});
