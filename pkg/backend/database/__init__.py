# Database module: хранение прогонов квантования
