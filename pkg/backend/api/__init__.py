# API module: HTTP доступ к квантованию и прогонам
