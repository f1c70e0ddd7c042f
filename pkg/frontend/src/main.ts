import { App } from './app.js'

// Served from the review service's own /assets mount, so the API lives at
// the page's origin. An ?api=http://host:port override supports running the
// page from elsewhere during development.
const params = new URLSearchParams(window.location.search)
const apiBase = params.get('api') ?? window.location.origin

const root = document.getElementById('app')
if (!root) throw new Error('missing #app mount point')

const app = new App(root, apiBase)
void app.start()
