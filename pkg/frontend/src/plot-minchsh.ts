#!/usr/bin/env node
import { runPlot } from "./cli.js";

process.exit(runPlot("minchsh", process.argv.slice(2)));
