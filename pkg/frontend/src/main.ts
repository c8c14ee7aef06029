import { ApiClient } from './api'
import { InspectorApp } from './app'

const root = document.getElementById('app')
if (!root) throw new Error('missing #app container')

const app = new InspectorApp(root, new ApiClient(''))
void app.load()
