#!/usr/bin/env node
import { run } from "../cli/plotDiagnostics.js";

process.exit(run(process.argv.slice(2)));
