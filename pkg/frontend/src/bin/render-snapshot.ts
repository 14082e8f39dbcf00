#!/usr/bin/env node
import { run } from "../cli/renderSnapshot.js";

process.exit(run(process.argv.slice(2)));
